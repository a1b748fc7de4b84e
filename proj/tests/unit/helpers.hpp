#pragma once

#include <initializer_list>
#include <random>

#include "zerodef/network.hpp"

namespace testing {

inline zerodef::Vector vec(std::initializer_list<double> v) {
    zerodef::Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

inline zerodef::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    zerodef::Matrix out(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double x : row) out(i, j++) = x;
        ++i;
    }
    return out;
}

inline zerodef::Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    zerodef::Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

inline double rel_err(const zerodef::Vector& a, const zerodef::Vector& b) {
    return (a - b).norm() / (1.0 + b.norm());
}

}  // namespace testing
