#pragma once

#include <string>
#include <vector>

#include "hopf/germ.hpp"
#include "hopf/tensor.hpp"

namespace hopf {

// A rank-r holomorphic bundle presented by a cocycle matrix over the germ it
// is equivariant against. The tangent preset carries the Jacobian cocycle.
struct EquivariantBundle {
    MapGerm base;          // contraction germ, n components
    SeriesMatrix cocycle;  // r x r, invertible at the origin

    EquivariantBundle(MapGerm base_germ, SeriesMatrix cocycle_matrix);
    static EquivariantBundle tangent(const MapGerm& g);

    int rank() const { return cocycle.rows(); }
    int dimension() const { return base.dimension(); }
    int cap() const { return base.cap(); }
};

// Matrix-valued 1-form: one r x r coefficient matrix of series per dz_l leg.
class ConnectionForm {
public:
    ConnectionForm(int rank, int dimension, int cap);

    int rank() const { return legs_.front().rows(); }
    int dimension() const { return int(legs_.size()); }
    int cap() const { return legs_.front().cap(); }

    SeriesMatrix& leg(int l) { return legs_[std::size_t(l)]; }
    const SeriesMatrix& leg(int l) const { return legs_[std::size_t(l)]; }

    double max_abs_coeff() const;

private:
    std::vector<SeriesMatrix> legs_;
};

// dθ + θ∧θ, stored on the strict upper pair triangle (k < l); storing one
// orientation per pair is the exact antisymmetry.
class CurvatureForm {
public:
    CurvatureForm(int rank, int dimension, int cap);

    int rank() const { return r_; }
    int dimension() const { return n_; }

    SeriesMatrix& block(int k, int l);
    const SeriesMatrix& block(int k, int l) const;

    double max_abs_coeff() const;
    double max_abs_coeff_through(int degree) const;

private:
    int n_;
    int r_;
    std::vector<SeriesMatrix> blocks_;
};

// T^i_{lm} = (θ_l)_{i,m} − (θ_m)_{i,l} for l < m, defined when rank equals
// base dimension; stored per pair as a column of series.
class TorsionTensor {
public:
    TorsionTensor(int dimension, int cap);

    int dimension() const { return n_; }
    SeriesMatrix& block(int l, int m);
    const SeriesMatrix& block(int l, int m) const;
    double max_abs_coeff() const;

private:
    int n_;
    std::vector<SeriesMatrix> blocks_;
};

struct ConnectionWarning {
    int degree;
    std::string note;
};

// Two valid eliminations of the graded fixed-point system; both respect the
// triangular dependency order, so agreement of their outputs witnesses
// uniqueness of the connection.
enum class SolveOrdering { degree_major, leg_major };

struct ConnectionReport {
    ConnectionForm theta;
    double fixed_point_residual;  // ‖pullback(θ) − θ‖ on the solved degrees
    double min_weight_gap;        // min |1 − weight| over solved entries
    bool ill_conditioned;         // min_weight_gap < 1e-10
    std::vector<ConnectionWarning> warnings;
};

struct CoframeReport {
    SeriesMatrix omega;  // row i = the i-th parallel 1-form, column j = dz_j slot
    double spread;       // disagreement between equivalent integration routes
    double closedness_residual;
};

struct DevelopingReport {
    MapGerm coordinates;
    double spread;
};

struct ConnectionPipelineReport {
    MapGerm change;      // developing coordinates
    MapGerm normalized;  // the linear germ the change conjugates onto
    double conjugacy_residual;
    double fixed_point_residual;
    double curvature_residual;  // measured below the truncation boundary
    double torsion_residual;
    double coframe_spread;
    double closedness_residual;
    double antiderivative_spread;
    double min_weight_gap;
    bool ill_conditioned;
    std::vector<ConnectionWarning> warnings;
};

// γ#θ = φ⁻¹dφ + φ⁻¹(γ*θ)φ, where γ*θ substitutes the base germ into the
// coefficients and transforms the form leg by the Jacobian.
ConnectionForm gauge_pullback(const ConnectionForm& theta, const EquivariantBundle& bundle);

// The unique fixed point of gauge_pullback, found degree by degree in
// spectrally prepared coordinates (base and fiber Schur frames). Weights of
// the graded operator equal fiber-ratio times base-monomial products; a
// weight at 1 with consistent data yields the minimal-norm choice plus a
// warning, an inconsistent one throws ResonanceObstructionError with the
// offending degree.
ConnectionReport solve_equivariant_connection(const EquivariantBundle& bundle,
                                              double tol = 1e-9,
                                              SolveOrdering ordering = SolveOrdering::degree_major);

CurvatureForm curvature(const ConnectionForm& theta);

TorsionTensor torsion(const ConnectionForm& theta);  // rank must equal dimension

// Rows of Ω solve ∂_l Ω = Ω·θ_l with Ω(0) = Id, averaging over the possible
// l-routes per monomial; requires flatness of θ below the truncation
// boundary within tol (scaled by max(1, ‖θ‖)).
CoframeReport parallel_coframe(const ConnectionForm& theta, double tol = 1e-9);

// Termwise antiderivative: ∂_j Z_i = Ω_ij, constant terms zero, averaging
// over the dz_j slots that feed one monomial; the recorded spread above
// tol·max(1, ‖Ω‖) throws the not-closed error.
DevelopingReport developing_coordinates(const SeriesMatrix& omega, double tol = 1e-9);

// Full pipeline: tangent bundle, connection solve, flatness and torsion
// measurement, parallel coframe, developing coordinates; the result
// conjugates g onto its linear part.
ConnectionPipelineReport linearize_via_connection(const MapGerm& g, double tol = 1e-9,
                                                  SolveOrdering ordering = SolveOrdering::degree_major);

}  // namespace hopf
