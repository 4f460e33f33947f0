#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "hopf/series.hpp"

namespace hopf {

// A tensor bundle over the quotient of a diagonal linear contraction with
// spectrum α = (α_1..α_n): p copies of the tangent factor, q copies of the
// cotangent factor, the k_can-th power of the canonical line (weight ∏α_i),
// and an optional flat character twist λ.
struct TensorBundleSpec {
    int p = 0;
    int q = 0;
    int k_can = 0;
    std::optional<Complex> line_character;

    // Serre partner B ↦ B^* ⊗ K: swaps p and q, maps k_can to 1 − k_can,
    // and inverts the character.
    TensorBundleSpec dual_serre_twist() const;
};

// One invariant basis tensor: frame indices per slot, the monomial factor,
// and the two-sided weight ratio (within tolerance of 1).
struct InvariantWitness {
    std::vector<int> contravariant;
    std::vector<int> covariant;
    MonomialIndex monomial;
    Complex weight;
};

struct SectionCount {
    int dim = 0;
    std::vector<InvariantWitness> witnesses;
};

// dims holds h^0..h^n. By construction h^1 = h^0, h^i = 0 for 1 < i < n−1,
// and h^{n−1} = h^n = invariant count of the Serre partner.
struct CohomologyReport {
    int n = 0;
    std::vector<int> dims;
    std::vector<InvariantWitness> witnesses;  // h^0 basis of the primal bundle
    double tolerance = 0.0;
};

// Extracts the spectrum of a diagonal matrix; off-diagonal entries above
// 1e-12 · (row scale) raise not_diagonal.
std::vector<Complex> diagonal_spectrum(const Eigen::MatrixXcd& a);

// Counts basis tensors (slot assignment ⊗ z^m) whose equivariance weight
// balances: with N = ∏ α over covariant slots · (∏α)^{k_can⁺} · α^m and
// D = ∏ α over contravariant slots · (∏α)^{k_can⁻} · λ, a tensor is
// invariant when |N − D| ≤ tol·|D|. Products are evaluated slot-by-slot and
// variable-by-variable in ascending order.
SectionCount invariant_section_dim(const std::vector<Complex>& alpha,
                                   const TensorBundleSpec& spec, double tol = 1e-9);

// Full table h^0..h^n for n ≥ 3 (throws dimension_too_small below that).
CohomologyReport mall_dims(const std::vector<Complex>& alpha, const TensorBundleSpec& spec,
                           double tol = 1e-9);

// Character twist of the trivial line: h^0 = #{m ≥ 0 : |α^m − λ| ≤ tol},
// the remaining rows as in mall_dims. Requires |λ| > tol so the count is
// finite.
CohomologyReport line_bundle_cohomology(const std::vector<Complex>& alpha, Complex lambda,
                                        double tol = 1e-9);

// Consistency check: the eigenvalue scan finds a multiplicative relation
// α_i = α^k (|k| ≥ 2) exactly when the cotangent-valued endomorphism bundle
// of the tangent factor has a nonzero invariant section. Returns whether the
// two computations agree.
bool resonance_cohomology_bridge(const std::vector<Complex>& alpha, double tol = 1e-9);

}  // namespace hopf
