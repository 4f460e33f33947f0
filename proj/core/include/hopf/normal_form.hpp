#pragma once

#include <utility>
#include <vector>

#include "hopf/germ.hpp"
#include "hopf/spectral.hpp"

namespace hopf {

// Result of one graded solve of A·h − h∘A = r on degree-d vector fields
// (conjugation direction U∘g∘U⁻¹). `unsolved` is the part of r lying in
// near-kernel directions, returned exactly as r − (A·h − h∘A).
// `resonant_directions` lists those directions as (component, monomial) pairs
// in the Schur frame of A; for upper-triangular (in particular diagonal) A
// the Schur frame is the input frame.
struct HomologicalSolution {
    std::vector<TruncatedSeries> h;
    std::vector<TruncatedSeries> unsolved;
    double small_divisor;  // min |α_i − α^m| over solved directions; inf if none
    std::vector<std::pair<int, MonomialIndex>> resonant_directions;
};

HomologicalSolution homological_solve(const SpectralData& s, int degree,
                                      const std::vector<TruncatedSeries>& r,
                                      double pivot_tol = 1e-9);

// Poincaré–Dulac output. `change` conjugates g to `normalized`:
// change∘g∘change⁻¹ = normalized up to max_residual. For a full
// linearization `normalized` is the linear part and kept_monomials is empty.
// kept_monomials lists the retained resonant terms (component, monomial) in
// the Schur frame of the linear part; ill_conditioned flags
// small_divisor < 1e-10 (result still returned).
struct NormalFormReport {
    MapGerm change;
    MapGerm normalized;
    std::vector<std::pair<int, MonomialIndex>> kept_monomials;
    double max_residual;
    double small_divisor;
    bool ill_conditioned;
};

// Full linearization of a non-resonant contraction germ; throws
// Error(resonant_input) when matrix_resonances(tol) is nonempty.
NormalFormReport linearize(const MapGerm& g, double tol = 1e-9);

// Resonant-friendly sweep: near-kernel monomials are kept in `normalized`,
// everything else is eliminated.
NormalFormReport normal_form(const MapGerm& g, double tol = 1e-9);

}  // namespace hopf
