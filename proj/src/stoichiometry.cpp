#include "zerodef/stoichiometry.hpp"

#include "zerodef/errors.hpp"
#include "zerodef/linprog.hpp"

namespace zerodef {

SubspaceBases stoich_subspace(const ReactionNetwork& net) {
    const int n = net.n();
    const int m = net.m();
    SubspaceBases out;
    if (m == 1) {
        out.D = Matrix::Zero(n, 0);
        out.Dperp = Matrix::Identity(n, n);
        return out;
    }
    Matrix diff(n, m - 1);
    for (int j = 1; j < m; ++j) diff.col(j - 1) = net.B().col(j) - net.B().col(0);
    Eigen::JacobiSVD<Matrix> svd(diff, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    }
    if (rank != m - 1) {
        throw StructuralError("stoichiometric subspace has dimension " + std::to_string(rank) + ", expected m - 1 = " +
                              std::to_string(m - 1));
    }
    out.D = svd.matrixU().leftCols(m - 1);
    out.Dperp = svd.matrixU().rightCols(n - m + 1);
    return out;
}

ClassId class_of(const SubspaceBases& bases, const Vector& p) {
    if (p.size() != bases.D.rows()) throw DomainError("state dimension mismatch");
    return ClassId{bases.Dperp.transpose() * p, p};
}

ClassId class_of(const ReactionNetwork& net, const Vector& p) {
    check_nonnegative_state(net, p);
    return class_of(stoich_subspace(net), p);
}

double class_distance(const SubspaceBases& bases, const Vector& p, const Vector& q) {
    return (bases.Dperp.transpose() * (p - q)).norm();
}

bool same_class(const SubspaceBases& bases, const Vector& p, const Vector& q) {
    return class_distance(bases, p, q) < 1e-9 * (1.0 + p.norm() + q.norm());
}

bool same_class(const ReactionNetwork& net, const Vector& p, const Vector& q) {
    check_nonnegative_state(net, p);
    check_nonnegative_state(net, q);
    return same_class(stoich_subspace(net), p, q);
}

RMembership in_R(const SubspaceBases& bases, const Vector& p) {
    const auto n = static_cast<int>(p.size());
    if (n != bases.D.rows()) throw DomainError("state dimension mismatch");
    const auto dim = static_cast<int>(bases.D.cols());
    RMembership out;
    if (p.minCoeff() > 0.0) {
        out.member = true;
        out.witness = Vector::Zero(n);
        out.depth = std::min(1.0, p.minCoeff());
        return out;
    }

    // Variables (y_1..y_dim, t), all free.
    LinearProgram lp;
    lp.A = Matrix::Zero(n + 1, dim + 1);
    lp.b = Vector(n + 1);
    lp.A.topLeftCorner(n, dim) = -bases.D;
    lp.A.block(0, dim, n, 1).setOnes();
    lp.b.head(n) = p;
    lp.A(n, dim) = 1.0;
    lp.b(n) = 1.0;
    lp.sense.assign(static_cast<std::size_t>(n + 1), Sense::LessEq);
    lp.c = Vector::Zero(dim + 1);
    lp.c(dim) = 1.0;
    lp.free.assign(static_cast<std::size_t>(dim + 1), true);

    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal) return out;
    const double t = res.x(dim);
    out.depth = t;
    out.member = t > 1e-12 * (1.0 + p.norm());
    if (out.member) out.witness = bases.D * res.x.head(dim);
    return out;
}

RMembership in_R(const ReactionNetwork& net, const Vector& p) {
    return in_R(stoich_subspace(net), p);
}

}  // namespace zerodef
