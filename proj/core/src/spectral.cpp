#include "hopf/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hopf/errors.hpp"

namespace hopf {

namespace {

constexpr double kContractionGuard = 1e-12;

std::vector<Complex> sorted_eigenvalues(const Eigen::MatrixXcd& T) {
    std::vector<Complex> ev;
    ev.reserve(std::size_t(T.rows()));
    for (int i = 0; i < T.rows(); ++i) ev.push_back(T(i, i));
    std::sort(ev.begin(), ev.end(), [](Complex a, Complex b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return ev;
}

// Group numerically equal values so duplicate relations collapse; returns the
// class representative (smallest index) for each entry.
std::vector<int> equality_classes(const std::vector<Complex>& values, double tol) {
    const int n = int(values.size());
    std::vector<int> rep(std::size_t(n), 0);
    std::iota(rep.begin(), rep.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
            const double scale =
                std::max(std::abs(values[std::size_t(i)]), std::abs(values[std::size_t(j)]));
            if (std::abs(values[std::size_t(i)] - values[std::size_t(j)]) <= tol * scale) {
                rep[std::size_t(i)] = rep[std::size_t(j)];
                break;
            }
        }
    return rep;
}

struct BoxSearch {
    const std::vector<Complex>& alpha;
    int bound;
    double prune_modulus;  // completions below this modulus cannot be hits
    std::vector<int> exponents;
    std::uint64_t visited = 0;

    template <typename Leaf>
    void run(Leaf&& leaf) {
        exponents.assign(alpha.size(), 0);
        descend(0, 0, Complex(1.0, 0.0), leaf);
    }

    template <typename Leaf>
    void descend(std::size_t var, int used, Complex product, Leaf&& leaf) {
        if (++visited > 50'000'000)
            throw Error(ErrorCode::capacity_exceeded,
                        "resonance search box too large; tighten the eigenvalue moduli");
        if (std::abs(product) < prune_modulus) return;  // only shrinks from here
        if (var == alpha.size()) {
            leaf(exponents, used, product);
            return;
        }
        Complex p = product;
        for (int k = 0; used + k <= bound; ++k) {
            exponents[var] = k;
            descend(var + 1, used + k, p, leaf);
            p *= alpha[var];
            if (std::abs(p) < prune_modulus && k + 1 <= bound - used) {
                // remaining exponent choices only lower the modulus further
                break;
            }
        }
        exponents[var] = 0;
    }
};

}  // namespace

SpectralData eigen_decompose(const Eigen::MatrixXcd& A) {
    if (A.rows() != A.cols() || A.rows() < 1)
        throw Error(ErrorCode::invalid_argument, "eigen decomposition needs a square matrix");
    if (A.rows() > 16)
        throw Error(ErrorCode::invalid_argument, "eigen decomposition capped at 16x16");
    if (!A.allFinite())
        throw Error(ErrorCode::invalid_argument, "matrix has non-finite entries");

    const int n = int(A.rows());
    SpectralData out;
    out.source = A;

    bool triangular = true;
    for (int i = 1; i < n && triangular; ++i)
        for (int j = 0; j < i && triangular; ++j) triangular = A(i, j) == Complex(0.0, 0.0);
    if (triangular) {
        // Already Schur: keep the input frame exactly (no unitary noise).
        out.schur_q = Eigen::MatrixXcd::Identity(n, n);
        out.schur_t = A;
        out.eigenvalues = sorted_eigenvalues(A);
        return out;
    }

    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(A, /*computeU=*/true);
    if (schur.info() != Eigen::Success)
        throw Error(ErrorCode::no_convergence, "Schur iteration failed to converge");
    out.schur_q = schur.matrixU();
    out.schur_t = schur.matrixT();

    const double residual = (A * out.schur_q - out.schur_q * out.schur_t).norm();
    if (residual > 1e-9 * std::max(A.norm(), std::numeric_limits<double>::min()))
        throw Error(ErrorCode::no_convergence, "Schur residual above tolerance");

    out.eigenvalues = sorted_eigenvalues(out.schur_t);
    return out;
}

bool is_contraction(const std::vector<Complex>& eigenvalues) {
    for (Complex a : eigenvalues)
        if (std::abs(a) >= 1.0 - kContractionGuard) return false;
    return true;
}

bool is_contraction(const SpectralData& s) { return is_contraction(s.eigenvalues); }

void require_contraction(const std::vector<Complex>& eigenvalues) {
    if (!is_contraction(eigenvalues))
        throw Error(ErrorCode::not_contraction,
                    "not a contraction: an eigenvalue modulus reaches 1 - 1e-12");
}

int resonance_bound(const std::vector<Complex>& alpha, const std::vector<Complex>& weights) {
    if (alpha.empty()) throw Error(ErrorCode::invalid_argument, "empty eigenvalue list");
    double max_mod = 0.0;
    for (Complex a : alpha) {
        const double m = std::abs(a);
        if (m <= 0.0 || m >= 1.0 - kContractionGuard)
            throw Error(ErrorCode::not_contraction,
                        "not a contraction: eigenvalue modulus outside (0, 1)");
        max_mod = std::max(max_mod, m);
    }
    const std::vector<Complex>& w = weights.empty() ? alpha : weights;
    double min_small = 0.0;
    bool found = false;
    for (Complex x : w) {
        const double m = std::abs(x);
        if (m == 0.0)
            throw Error(ErrorCode::invalid_argument, "zero weight in resonance bound");
        if (m < 1.0 && (!found || m < min_small)) {
            min_small = m;
            found = true;
        }
    }
    if (!found) return 0;
    return int(std::ceil(std::log(min_small) / std::log(max_mod) - 1e-12));
}

ResonanceScan matrix_resonances(const std::vector<Complex>& alpha, double tol) {
    require_contraction(alpha);
    const int n = int(alpha.size());
    ResonanceScan scan;
    scan.nearest_miss = std::numeric_limits<double>::infinity();
    scan.bound = resonance_bound(alpha);

    if (scan.bound < 2) return scan;

    double min_target = std::abs(alpha.front());
    for (Complex a : alpha) min_target = std::min(min_target, std::abs(a));

    const std::vector<int> cls = equality_classes(alpha, tol);
    std::vector<std::pair<int, std::vector<int>>> seen;  // (target class, exponents)

    // Hits need |∏α^k| ≥ min|α|·(1−tol); the extra 0.5 margin keeps near
    // misses in view so nearest_miss stays informative.
    BoxSearch search{alpha, scan.bound, 0.5 * min_target * (1.0 - tol), {}, 0};
    search.run([&](const std::vector<int>& k, int total, Complex product) {
        if (total < 2) return;
        for (int i = 0; i < n; ++i) {
            const double residual = std::abs(alpha[std::size_t(i)] - product);
            if (residual <= tol * std::abs(alpha[std::size_t(i)])) {
                const std::pair<int, std::vector<int>> key{cls[std::size_t(i)], k};
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(key);
                scan.relations.push_back({ResonanceRelation::Kind::matrix, i, -1,
                                          MonomialIndex(k), residual});
            } else {
                scan.nearest_miss = std::min(scan.nearest_miss, residual);
            }
        }
    });
    return scan;
}

ResonanceScan matrix_resonances(const SpectralData& s, double tol) {
    return matrix_resonances(s.eigenvalues, tol);
}

ResonanceScan bundle_resonances(const std::vector<Complex>& alpha,
                                const std::vector<Complex>& beta, double tol) {
    require_contraction(alpha);
    if (beta.empty()) throw Error(ErrorCode::invalid_argument, "empty fiber eigenvalue list");
    for (Complex b : beta)
        if (std::abs(b) == 0.0)
            throw Error(ErrorCode::invalid_argument, "zero fiber eigenvalue");

    const int m = int(beta.size());
    std::vector<Complex> ratios;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            const Complex r = beta[std::size_t(p)] / beta[std::size_t(q)];
            ratios.push_back(r);
            if (std::abs(r) < 1.0) min_ratio = std::min(min_ratio, std::abs(r));
        }

    ResonanceScan scan;
    scan.nearest_miss = std::numeric_limits<double>::infinity();
    scan.bound = resonance_bound(alpha, ratios);
    if (scan.bound < 1) return scan;

    const std::vector<int> cls = equality_classes(beta, tol);
    std::vector<std::tuple<int, int, std::vector<int>>> seen;

    BoxSearch search{alpha, scan.bound,
                     std::isfinite(min_ratio) ? 0.5 * min_ratio * (1.0 - tol) : 2.0, {}, 0};
    search.run([&](const std::vector<int>& k, int total, Complex product) {
        if (total < 1) return;
        for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q) {
                const double residual =
                    std::abs(beta[std::size_t(p)] - beta[std::size_t(q)] * product);
                if (residual <= tol * std::abs(beta[std::size_t(p)])) {
                    const std::tuple<int, int, std::vector<int>> key{cls[std::size_t(p)],
                                                                     cls[std::size_t(q)], k};
                    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                    seen.push_back(key);
                    scan.relations.push_back({ResonanceRelation::Kind::bundle, p, q,
                                              MonomialIndex(k), residual});
                } else {
                    scan.nearest_miss = std::min(scan.nearest_miss, residual);
                }
            }
    });
    return scan;
}

ResonanceScan bundle_resonances(const SpectralData& s, const Eigen::MatrixXcd& fiber_matrix,
                                double tol) {
    return bundle_resonances(s.eigenvalues, eigen_decompose(fiber_matrix).eigenvalues, tol);
}

}  // namespace hopf
