#include "zerodef/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "zerodef/errors.hpp"

namespace zerodef {

namespace {

using Term = std::pair<int, double>;  // species index, coefficient
using ComplexKey = std::vector<Term>;  // sorted by species index

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class LineLexer {
public:
    LineLexer(std::string_view text, int line) : s_(text), line_(line) {}

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
    }
    [[nodiscard]] bool at_end() {
        skip_ws();
        return pos_ >= s_.size();
    }
    [[nodiscard]] int column() const { return static_cast<int>(pos_) + 1; }
    [[nodiscard]] char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    [[nodiscard]] bool starts_with(std::string_view tok) {
        skip_ws();
        return s_.substr(pos_).starts_with(tok);
    }
    bool accept(std::string_view tok) {
        if (!starts_with(tok)) return false;
        pos_ += tok.size();
        return true;
    }
    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }

    std::optional<std::string> ident() {
        skip_ws();
        if (pos_ >= s_.size() || !ident_start(s_[pos_])) return std::nullopt;
        const std::size_t begin = pos_;
        while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
        return std::string(s_.substr(begin, pos_ - begin));
    }

    std::optional<double> number() {
        skip_ws();
        if (pos_ >= s_.size()) return std::nullopt;
        const char c = s_[pos_];
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-')) return std::nullopt;
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const char* last = s_.data() + s_.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr == first) return std::nullopt;
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, column(), msg); }
    [[noreturn]] void fail_at(int col, const std::string& msg) const { throw ParseError(line_, col, msg); }
    [[nodiscard]] int line() const { return line_; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
};

struct KineticsDirective {
    std::string species;
    KineticsFn fn;
    int line;
    int column;
};

class DocumentBuilder {
public:
    void declare_species(const std::string& name, LineLexer& lx, int col) {
        if (index_.count(name) != 0) lx.fail_at(col, "species '" + name + "' declared twice or after first use");
        add_species(name, lx.line());
    }

    int species_index(const std::string& name, int line) {
        auto it = index_.find(name);
        if (it != index_.end()) return it->second;
        return add_species(name, line);
    }

    ComplexKey read_complex(LineLexer& lx) {
        const int start = lx.column();
        if (lx.peek() == '0') {
            LineLexer probe = lx;
            auto v = probe.number();
            if (v && *v == 0.0 && !probe.ident()) {
                lx.fail_at(start,
                           "the empty complex '0' is not allowed: complexes must be nonzero and linearly independent");
            }
        }
        std::map<int, double> terms;
        while (true) {
            const int term_col = lx.column();
            double coeff = 1.0;
            if (auto c = lx.number()) {
                coeff = *c;
                if (!std::isfinite(coeff) || coeff < 1.0) {
                    lx.fail_at(term_col, "stoichiometric coefficient must be at least 1");
                }
            }
            auto name = lx.ident();
            if (!name) lx.fail("expected a species name");
            terms[species_index(*name, lx.line())] += coeff;
            if (!lx.accept("+")) break;
        }
        return ComplexKey(terms.begin(), terms.end());
    }

    int complex_index(const ComplexKey& key, int line) {
        auto it = std::find(complexes_.begin(), complexes_.end(), key);
        if (it != complexes_.end()) return static_cast<int>(it - complexes_.begin());
        complexes_.push_back(key);
        complex_lines_.push_back(line);
        return static_cast<int>(complexes_.size()) - 1;
    }

    void add_edge(int src, int dst, double rate) {
        edges_.push_back({src, dst, rate});
        ++reaction_count_;
    }

    void add_kinetics(KineticsDirective d, LineLexer& lx) {
        for (const auto& k : kinetics_) {
            if (k.species == d.species) lx.fail_at(d.column, "duplicate kinetics directive for species '" + d.species + "'");
        }
        kinetics_.push_back(std::move(d));
    }

    ParsedNetwork finish() {
        const int n = static_cast<int>(names_.size());
        const int m = static_cast<int>(complexes_.size());
        if (n == 0 || m == 0) throw ParseError(1, 1, "document contains no reactions");
        Matrix a = Matrix::Zero(m, m);
        for (const auto& e : edges_) a(e.dst, e.src) += e.rate;
        Matrix b = Matrix::Zero(n, m);
        for (int j = 0; j < m; ++j) {
            for (const auto& [k, c] : complexes_[static_cast<std::size_t>(j)]) b(k, j) = c;
        }
        std::vector<KineticsFn> theta(static_cast<std::size_t>(n), KineticsFn::mass_action());
        for (const auto& d : kinetics_) {
            auto it = index_.find(d.species);
            if (it == index_.end()) throw ParseError(d.line, d.column, "kinetics directive for unknown species '" + d.species + "'");
            theta[static_cast<std::size_t>(it->second)] = d.fn;
        }
        ParsedNetwork out{ReactionNetwork(std::move(a), std::move(b), std::move(theta), names_), complex_lines_,
                          species_lines_, reaction_count_};
        return out;
    }

private:
    int add_species(const std::string& name, int line) {
        const int idx = static_cast<int>(names_.size());
        index_[name] = idx;
        names_.push_back(name);
        species_lines_.push_back(line);
        return idx;
    }

    struct Edge {
        int src;
        int dst;
        double rate;
    };

    std::map<std::string, int> index_;
    std::vector<std::string> names_;
    std::vector<int> species_lines_;
    std::vector<ComplexKey> complexes_;
    std::vector<int> complex_lines_;
    std::vector<Edge> edges_;
    std::vector<KineticsDirective> kinetics_;
    int reaction_count_ = 0;
};

double read_rate(LineLexer& lx) {
    const int col = lx.column();
    auto v = lx.number();
    if (!v) lx.fail("expected a numeric rate constant");
    if (!std::isfinite(*v) || *v <= 0.0) lx.fail_at(col, "rate constant must be positive");
    return *v;
}

bool is_directive(std::string_view line, std::string_view keyword) {
    std::size_t p = line.find_first_not_of(" \t");
    if (p == std::string_view::npos) return false;
    line.remove_prefix(p);
    if (!line.starts_with(keyword)) return false;
    if (line.size() == keyword.size() || ident_char(line[keyword.size()])) return false;
    return line.find("->") == std::string_view::npos;
}

void parse_reaction(LineLexer& lx, DocumentBuilder& doc) {
    const ComplexKey lhs = doc.read_complex(lx);
    bool reversible = false;
    if (lx.accept("<->")) {
        reversible = true;
    } else if (!lx.accept("->")) {
        lx.fail("expected '->' or '<->'");
    }
    const ComplexKey rhs = doc.read_complex(lx);
    lx.expect("@");
    const double fwd = read_rate(lx);
    std::optional<double> bwd;
    if (lx.accept(",")) bwd = read_rate(lx);
    if (!lx.at_end()) lx.fail("unexpected text after reaction");
    if (reversible && !bwd) lx.fail("reversible reaction needs two rates");
    if (!reversible && bwd) lx.fail("irreversible reaction takes one rate");

    const int src = doc.complex_index(lhs, lx.line());
    const int dst = doc.complex_index(rhs, lx.line());
    doc.add_edge(src, dst, fwd);
    if (bwd) doc.add_edge(dst, src, *bwd);
}

void parse_line(std::string_view raw, int line_no, DocumentBuilder& doc) {
    std::string_view line = raw.substr(0, raw.find('#'));
    LineLexer lx(line, line_no);
    if (lx.at_end()) return;

    if (is_directive(line, "species")) {
        lx.expect("species");
        do {
            const int col = lx.column();
            auto name = lx.ident();
            if (!name) lx.fail("expected a species name");
            doc.declare_species(*name, lx, col);
        } while (lx.accept(","));
        if (!lx.at_end()) lx.fail("unexpected text after species list");
        return;
    }
    if (is_directive(line, "complex")) {
        lx.expect("complex");
        const ComplexKey c = doc.read_complex(lx);
        if (!lx.at_end()) lx.fail("unexpected text after complex");
        doc.complex_index(c, line_no);
        return;
    }
    if (is_directive(line, "kinetics")) {
        lx.expect("kinetics");
        const int col = lx.column();
        auto name = lx.ident();
        if (!name) lx.fail("expected a species name");
        lx.expect("=");
        KineticsFn fn;
        if (lx.accept("mass_action")) {
            fn = KineticsFn::mass_action();
        } else if (lx.accept("mm")) {
            lx.expect("(");
            const int kcol = lx.column();
            auto k = lx.number();
            if (!k) lx.fail("expected the Michaelis-Menten constant");
            if (!std::isfinite(*k) || *k <= 0.0) lx.fail_at(kcol, "Michaelis-Menten constant must be positive");
            lx.expect(")");
            fn = KineticsFn::michaelis_menten(*k);
        } else {
            lx.fail("expected 'mass_action' or 'mm(K)'");
        }
        if (!lx.at_end()) lx.fail("unexpected text after kinetics directive");
        doc.add_kinetics({*name, fn, line_no, col}, lx);
        return;
    }
    parse_reaction(lx, doc);
}

bool valid_identifier(const std::string& s) {
    if (s.empty() || !ident_start(s[0])) return false;
    return std::all_of(s.begin(), s.end(), ident_char);
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

ParsedNetwork parse_unvalidated(std::string_view text) {
    DocumentBuilder doc;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        ++line_no;
        parse_line(text.substr(start, end - start), line_no, doc);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return doc.finish();
}

ReactionNetwork parse(std::string_view text) {
    ParsedNetwork doc = parse_unvalidated(text);
    const ValidationReport rep = validate(doc.network);
    if (rep.all_passed()) return std::move(doc.network);

    auto cline = [&](int j) { return doc.complex_lines[static_cast<std::size_t>(j)]; };
    std::ostringstream os;
    os << "network violates the structural assumptions:";
    if (!rep.irreducible.passed) {
        const int j = *rep.unreachable_complex;
        os << "\n  line " << cline(j) << ": " << rep.irreducible.diagnostic << " ("
           << format_complex(doc.network, j) << "); the reaction graph must be strongly connected";
    }
    if (!rep.entries.passed) {
        const auto [k, j] = *rep.bad_entry;
        os << "\n  line " << cline(j) << ": " << rep.entries.diagnostic << " (species "
           << doc.network.species()[static_cast<std::size_t>(k)] << ")";
    }
    if (!rep.rank.passed) {
        os << "\n  line " << *std::max_element(doc.complex_lines.begin(), doc.complex_lines.end()) << ": "
           << rep.rank.diagnostic << "; complexes must be linearly independent";
    }
    if (!rep.rows.passed) {
        os << "\n  line " << doc.species_lines[static_cast<std::size_t>(*rep.zero_row)] << ": " << rep.rows.diagnostic;
    }
    throw HypothesisError(os.str());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ReactionNetwork parse_file(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::string format_complex(const ReactionNetwork& net, int j) {
    std::string out;
    for (int k = 0; k < net.n(); ++k) {
        const double c = net.B()(k, j);
        if (c == 0.0) continue;
        if (!out.empty()) out += " + ";
        if (c != 1.0) out += format_real(c) + " ";
        out += net.species()[static_cast<std::size_t>(k)];
    }
    return out;
}

std::string serialize(const ReactionNetwork& net) {
    for (const auto& s : net.species()) {
        if (!valid_identifier(s)) throw DomainError("species name '" + s + "' is not an identifier");
    }
    const int n = net.n();
    const int m = net.m();

    struct Edge {
        int src;
        int dst;
    };
    std::vector<Edge> edges;
    for (int src = 0; src < m; ++src) {
        for (int dst = 0; dst < m; ++dst) {
            if (net.A()(dst, src) > 0.0) edges.push_back({src, dst});
        }
    }

    std::vector<int> complex_order;
    std::vector<bool> seen_c(static_cast<std::size_t>(m), false);
    auto touch_c = [&](int j) {
        if (!seen_c[static_cast<std::size_t>(j)]) {
            seen_c[static_cast<std::size_t>(j)] = true;
            complex_order.push_back(j);
        }
    };
    for (const auto& e : edges) {
        touch_c(e.src);
        touch_c(e.dst);
    }
    bool declare_complexes = static_cast<int>(complex_order.size()) != m;
    for (int j = 0; j < static_cast<int>(complex_order.size()) && !declare_complexes; ++j) {
        declare_complexes = complex_order[static_cast<std::size_t>(j)] != j;
    }
    if (declare_complexes) {
        complex_order.clear();
        for (int j = 0; j < m; ++j) complex_order.push_back(j);
    }

    std::vector<int> species_order;
    std::vector<bool> seen_s(static_cast<std::size_t>(n), false);
    for (int j : complex_order) {
        for (int k = 0; k < n; ++k) {
            if (net.B()(k, j) != 0.0 && !seen_s[static_cast<std::size_t>(k)]) {
                seen_s[static_cast<std::size_t>(k)] = true;
                species_order.push_back(k);
            }
        }
    }
    bool declare_species = static_cast<int>(species_order.size()) != n;
    for (int k = 0; k < static_cast<int>(species_order.size()) && !declare_species; ++k) {
        declare_species = species_order[static_cast<std::size_t>(k)] != k;
    }

    std::string out;
    if (declare_species) {
        out += "species ";
        for (int k = 0; k < n; ++k) {
            if (k > 0) out += ", ";
            out += net.species()[static_cast<std::size_t>(k)];
        }
        out += "\n";
    }
    if (declare_complexes) {
        for (int j = 0; j < m; ++j) out += "complex " + format_complex(net, j) + "\n";
    }
    for (const auto& e : edges) {
        out += format_complex(net, e.src) + " -> " + format_complex(net, e.dst) + " @ " +
               format_real(net.A()(e.dst, e.src)) + "\n";
    }
    for (int k = 0; k < n; ++k) {
        const auto& t = net.theta(k);
        if (!t.is_mass_action()) out += "kinetics " + net.species()[static_cast<std::size_t>(k)] + " = " + t.describe() + "\n";
    }
    return out;
}

}  // namespace zerodef
