#pragma once

// Shared samplers and comparison utilities for the test suite.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "hopf/germ.hpp"
#include "hopf/parse.hpp"
#include "hopf/series.hpp"

namespace testutil {

using hopf::Complex;

inline Complex random_on_annulus(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> mod(lo, hi);
    std::uniform_real_distribution<double> arg(0.0, 6.283185307179586);
    return std::polar(mod(rng), arg(rng));
}

// Contraction linear parts of three textures: diagonal, mildly non-normal
// upper triangular, and a well-conditioned similarity of a diagonal.
inline Eigen::MatrixXcd random_contraction(std::mt19937_64& rng, int n, int style,
                                           double lo = 0.35, double hi = 0.8) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = random_on_annulus(rng, lo, hi);
    if (style == 0) return a;
    if (style == 1) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) a(i, j) = random_on_annulus(rng, 0.0, 0.15);
        return a;
    }
    Eigen::MatrixXcd s = Eigen::MatrixXcd::Identity(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) s(i, j) = random_on_annulus(rng, 0.0, 0.2);
    return s * a * s.inverse();
}

// Polynomial germ: the given linear part plus `terms` random higher-order
// monomials per component with coefficient moduli in [0.05, coeff_cap].
inline hopf::MapGerm random_polynomial_germ(std::mt19937_64& rng, const Eigen::MatrixXcd& a,
                                            int cap, int terms, double coeff_cap,
                                            int max_degree = 4) {
    const int n = int(a.rows());
    hopf::MapGerm lin = hopf::MapGerm::linear(a, cap);
    std::vector<hopf::TruncatedSeries> comps;
    std::uniform_int_distribution<int> deg(2, std::min(max_degree, cap));
    for (int i = 0; i < n; ++i) {
        hopf::TruncatedSeries s = lin.components()[std::size_t(i)];
        for (int t = 0; t < terms; ++t) {
            std::vector<int> exps(std::size_t(n), 0);
            const int d = deg(rng);
            for (int u = 0; u < d; ++u) ++exps[rng() % std::size_t(n)];
            s.set_coefficient(hopf::MonomialIndex(exps),
                              random_on_annulus(rng, 0.05, coeff_cap));
        }
        comps.push_back(std::move(s));
    }
    return hopf::MapGerm(std::move(comps));
}

inline double series_distance(const hopf::TruncatedSeries& a, const hopf::TruncatedSeries& b) {
    return (a - b).max_abs_coeff();
}

inline double germ_distance(const hopf::MapGerm& a, const hopf::MapGerm& b) {
    double best = 0.0;
    for (int i = 0; i < a.dimension(); ++i)
        best = std::max(best, series_distance(a.component(i), b.component(i)));
    return best;
}

// Largest coefficient modulus among degree >= 2 terms: "how nonlinear" a
// germ is, used to recognize linear maps.
inline double nonlinear_mass(const hopf::MapGerm& g) {
    return g.nonlinear_max_abs_coeff();
}

inline hopf::MapGerm germ_of(const std::vector<std::string>& exprs, int n, int cap) {
    return hopf::parse_germ(exprs, n, cap);
}

}  // namespace testutil
