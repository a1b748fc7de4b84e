#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "zerodef/network.hpp"

namespace zerodef {

/// Result of reading a .crn document before the hypotheses are checked.
struct ParsedNetwork {
    ReactionNetwork network;
    std::vector<int> complex_lines;  // line of first appearance, per complex
    std::vector<int> species_lines;  // line of first appearance, per species
    int reaction_count = 0;          // edges after expanding "<->"
};

/// Grammar, one statement per line ("#" starts a comment):
///
///   A + 2 B -> C @ 1.5          reaction with its rate
///   A + 2 B <-> C @ 1.5, 0.3    forward and backward rates
///   species A, B, C             fix the species order (otherwise first use)
///   complex A + 2 B             fix the position of a complex (otherwise first use)
///   kinetics A = mm(0.5)        per-species kinetics; default mass_action
///
/// Throws ParseError with line and column on malformed input.
[[nodiscard]] ParsedNetwork parse_unvalidated(std::string_view text);

/// parse_unvalidated followed by validate(); failed hypotheses are reported
/// as a HypothesisError whose message points at the offending lines.
[[nodiscard]] ReactionNetwork parse(std::string_view text);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
[[nodiscard]] ReactionNetwork parse_file(const std::filesystem::path& path);

/// Canonical text; parse(serialize(net)) reproduces A, B, kinetics and species
/// order exactly.
[[nodiscard]] std::string serialize(const ReactionNetwork& net);

/// Complex j written as "A + 2 B".
[[nodiscard]] std::string format_complex(const ReactionNetwork& net, int j);

/// Number printed with 17 significant digits (shortest exact form for integers).
[[nodiscard]] std::string format_real(double v);

}  // namespace zerodef
