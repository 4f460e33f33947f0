#pragma once

#include <Eigen/Core>
#include <vector>

#include "hopf/series.hpp"

namespace hopf {

// Schur data of a linear part A: Q unitary, T = Q*AQ upper triangular with
// ‖AQ − QT‖ ≤ 1e-9·‖A‖. `eigenvalues` holds diag(T) sorted by decreasing
// modulus (ties by decreasing real, then imaginary, part); the diagonal of T
// itself keeps the factorization's own order.
struct SpectralData {
    Eigen::MatrixXcd source;
    Eigen::MatrixXcd schur_q;
    Eigen::MatrixXcd schur_t;
    std::vector<Complex> eigenvalues;
};

SpectralData eigen_decompose(const Eigen::MatrixXcd& A);  // n ≤ 16

// max |α| < 1 − 1e-12 (guard band counts the boundary as non-contracting).
bool is_contraction(const SpectralData& s);
bool is_contraction(const std::vector<Complex>& eigenvalues);
void require_contraction(const std::vector<Complex>& eigenvalues);

// One multiplicative eigenvalue identity. Matrix kind: α_target = ∏α^k with
// |k| ≥ 2 (source = -1). Bundle kind: β_target = β_source·∏α^k with |k| ≥ 1.
// `residual` is the absolute distance between the two sides.
struct ResonanceRelation {
    enum class Kind { matrix, bundle };
    Kind kind;
    int target;
    int source;
    MonomialIndex exponents;
    double residual;

    friend bool operator==(const ResonanceRelation& a, const ResonanceRelation& b) {
        return a.kind == b.kind && a.target == b.target && a.source == b.source &&
               a.exponents == b.exponents;
    }
};

struct ResonanceScan {
    std::vector<ResonanceRelation> relations;
    double nearest_miss;  // smallest residual among rejected candidates; inf if none examined
    int bound;            // exponent-box radius searched
};

// Largest |k| a relation ∏α^k = w can reach for any weight w with |w| < 1:
// ⌈log(min such |w|) / log(max|α|)⌉; 0 when no weight has modulus < 1.
// Weights default to α itself (the matrix-resonance case).
int resonance_bound(const std::vector<Complex>& alpha,
                    const std::vector<Complex>& weights = {});

// Exhaustive scan over 2 ≤ |k| ≤ resonance_bound; a hit is
// |α_i − ∏α^k| ≤ tol·|α_i|. Duplicates arising from numerically equal
// eigenvalues are reported once (smallest target index wins).
ResonanceScan matrix_resonances(const std::vector<Complex>& alpha, double tol = 1e-9);
ResonanceScan matrix_resonances(const SpectralData& s, double tol = 1e-9);

// Same over 1 ≤ |k| ≤ bound with hits |β_p − β_q·∏α^k| ≤ tol·|β_p|.
ResonanceScan bundle_resonances(const std::vector<Complex>& alpha,
                                const std::vector<Complex>& beta, double tol = 1e-9);
ResonanceScan bundle_resonances(const SpectralData& s, const Eigen::MatrixXcd& fiber_matrix,
                                double tol = 1e-9);

}  // namespace hopf
