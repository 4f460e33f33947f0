#include "hopf/connection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "hopf/errors.hpp"
#include "hopf/spectral.hpp"
#include "jet_layout.hpp"

namespace hopf {

using detail::key_degree;
using detail::PackedKey;

namespace {

constexpr double kIllConditionedFloor = 1e-10;

bool is_identity(const Eigen::MatrixXcd& m) {
    return m == Eigen::MatrixXcd::Identity(m.rows(), m.cols());
}

SeriesMatrix scale_by_series(const SeriesMatrix& m, const TruncatedSeries& s) {
    SeriesMatrix out(m.rows(), m.cols(), m.dimension(), m.cap());
    if (s.is_zero()) return out;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!m.at(i, j).is_zero()) out.at(i, j) = m.at(i, j) * s;
    return out;
}

double max_abs_through(const TruncatedSeries& s, int degree) {
    double best = 0.0;
    for (const auto& [k, c] : s.raw_terms())
        if (key_degree(k) <= degree) best = std::max(best, std::abs(c));
    return best;
}

double max_abs_through(const SeriesMatrix& m, int degree) {
    double best = 0.0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            best = std::max(best, max_abs_through(m.at(i, j), degree));
    return best;
}

// legs'_j = φ⁻¹ (Σ_l (legs_l ∘ base) · J_lj) φ — the θ-linear part of the
// gauge pullback, shared by the public operation and the incremental solver.
std::vector<SeriesMatrix> pull_form_legs(const std::vector<SeriesMatrix>& legs,
                                         GermComposer& composer, const SeriesMatrix& jac,
                                         const SeriesMatrix& phi_inv, const SeriesMatrix& phi) {
    const int n = int(legs.size());
    std::vector<SeriesMatrix> composed;
    composed.reserve(std::size_t(n));
    for (const auto& leg : legs) composed.push_back(compose_entries(leg, composer));
    std::vector<SeriesMatrix> out;
    out.reserve(std::size_t(n));
    for (int j = 0; j < n; ++j) {
        SeriesMatrix acc(phi.rows(), phi.cols(), phi.dimension(), phi.cap());
        for (int l = 0; l < n; ++l) {
            if (composed[std::size_t(l)].is_zero()) continue;
            acc += scale_by_series(composed[std::size_t(l)], jac.at(l, j));
        }
        out.push_back(phi_inv * acc * phi);
    }
    return out;
}

}  // namespace

// ------------------------------------------------------------------ bundles

EquivariantBundle::EquivariantBundle(MapGerm base_germ, SeriesMatrix cocycle_matrix)
    : base(std::move(base_germ)), cocycle(std::move(cocycle_matrix)) {
    if (cocycle.rows() != cocycle.cols())
        throw Error(ErrorCode::dimension_mismatch, "cocycle matrix must be square");
    if (cocycle.dimension() != base.dimension() || cocycle.cap() != base.cap())
        throw Error(ErrorCode::dimension_mismatch,
                    "cocycle and base germ disagree in dimension or cap");
    const Eigen::MatrixXcd at_zero = cocycle.value_at_zero();
    double scale = 1.0;
    for (int i = 0; i < at_zero.rows(); ++i) scale *= at_zero.row(i).norm();
    if (scale == 0.0 || std::abs(at_zero.determinant()) <= 1e-12 * scale)
        throw Error(ErrorCode::singular_cocycle, "cocycle is singular at the base point");
}

EquivariantBundle EquivariantBundle::tangent(const MapGerm& g) {
    return EquivariantBundle(g, jacobian(g));
}

ConnectionForm::ConnectionForm(int rank, int dimension, int cap) {
    if (rank < 1) throw Error(ErrorCode::invalid_argument, "connection rank must be positive");
    legs_.assign(std::size_t(dimension), SeriesMatrix(rank, rank, dimension, cap));
}

double ConnectionForm::max_abs_coeff() const {
    double best = 0.0;
    for (const auto& leg : legs_) best = std::max(best, leg.max_abs_coeff());
    return best;
}

CurvatureForm::CurvatureForm(int rank, int dimension, int cap) : n_(dimension), r_(rank) {
    blocks_.assign(std::size_t(n_ * (n_ - 1) / 2), SeriesMatrix(rank, rank, dimension, cap));
}

namespace {
int pair_slot(int k, int l, int n) {
    if (k < 0 || l <= k || l >= n)
        throw Error(ErrorCode::invalid_argument, "pair index must satisfy 0 <= k < l < n");
    return k * (2 * n - k - 1) / 2 + (l - k - 1);
}
}  // namespace

SeriesMatrix& CurvatureForm::block(int k, int l) {
    return blocks_[std::size_t(pair_slot(k, l, n_))];
}
const SeriesMatrix& CurvatureForm::block(int k, int l) const {
    return blocks_[std::size_t(pair_slot(k, l, n_))];
}

double CurvatureForm::max_abs_coeff() const {
    double best = 0.0;
    for (const auto& b : blocks_) best = std::max(best, b.max_abs_coeff());
    return best;
}

double CurvatureForm::max_abs_coeff_through(int degree) const {
    double best = 0.0;
    for (const auto& b : blocks_) best = std::max(best, max_abs_through(b, degree));
    return best;
}

TorsionTensor::TorsionTensor(int dimension, int cap) : n_(dimension) {
    blocks_.assign(std::size_t(n_ * (n_ - 1) / 2), SeriesMatrix(n_, 1, dimension, cap));
}

SeriesMatrix& TorsionTensor::block(int l, int m) {
    return blocks_[std::size_t(pair_slot(l, m, n_))];
}
const SeriesMatrix& TorsionTensor::block(int l, int m) const {
    return blocks_[std::size_t(pair_slot(l, m, n_))];
}

double TorsionTensor::max_abs_coeff() const {
    double best = 0.0;
    for (const auto& b : blocks_) best = std::max(best, b.max_abs_coeff());
    return best;
}

// ----------------------------------------------------------------- pullback

ConnectionForm gauge_pullback(const ConnectionForm& theta, const EquivariantBundle& bundle) {
    const int n = bundle.dimension();
    if (theta.dimension() != n || theta.rank() != bundle.rank() || theta.cap() != bundle.cap())
        throw Error(ErrorCode::dimension_mismatch, "connection form does not fit the bundle");
    const SeriesMatrix phi_inv = invert_series_matrix(bundle.cocycle);
    GermComposer composer(bundle.base.components());
    const SeriesMatrix jac = jacobian(bundle.base);

    std::vector<SeriesMatrix> legs;
    legs.reserve(std::size_t(n));
    for (int l = 0; l < n; ++l) legs.push_back(theta.leg(l));
    std::vector<SeriesMatrix> pulled = pull_form_legs(legs, composer, jac, phi_inv, bundle.cocycle);

    ConnectionForm out(bundle.rank(), n, bundle.cap());
    for (int j = 0; j < n; ++j)
        out.leg(j) = phi_inv * differentiate_entries(bundle.cocycle, j) + pulled[std::size_t(j)];
    return out;
}

// ------------------------------------------------------------------- solver

namespace {

struct PreparedBundle {
    MapGerm gamma;
    SeriesMatrix phi;
    Eigen::MatrixXcd base_q;
    Eigen::MatrixXcd base_t;
    Eigen::MatrixXcd fiber_c;
    Eigen::MatrixXcd fiber_t;
    bool plain;  // both frames already triangular: no transforms applied
};

PreparedBundle prepare(const EquivariantBundle& bundle) {
    const SpectralData base_s = eigen_decompose(bundle.base.linear_part());
    require_contraction(base_s.eigenvalues);
    const SpectralData fiber_s = eigen_decompose(bundle.cocycle.value_at_zero());

    PreparedBundle p{bundle.base,  bundle.cocycle,  base_s.schur_q,
                     base_s.schur_t, fiber_s.schur_q, fiber_s.schur_t,
                     true};
    if (is_identity(base_s.schur_q) && is_identity(fiber_s.schur_q)) return p;
    p.plain = false;

    const int cap = bundle.cap();
    const Eigen::MatrixXcd q = base_s.schur_q;
    const Eigen::MatrixXcd qh = q.adjoint();
    p.gamma = compose_germs(MapGerm::linear(qh, cap),
                            compose_germs(bundle.base, MapGerm::linear(q, cap)));

    GermComposer into_q(MapGerm::linear(q, cap).components());
    const int n = bundle.dimension();
    const Eigen::MatrixXcd c = fiber_s.schur_q;
    p.phi = SeriesMatrix::constant(c.adjoint(), n, cap) * compose_entries(bundle.cocycle, into_q) *
            SeriesMatrix::constant(c, n, cap);
    return p;
}

}  // namespace

ConnectionReport solve_equivariant_connection(const EquivariantBundle& bundle, double tol,
                                              SolveOrdering ordering) {
    const PreparedBundle prep = prepare(bundle);
    const int n = bundle.dimension();
    const int r = bundle.rank();
    const int cap = bundle.cap();
    const double pivot_tol = std::max(tol, 1e-13);
    const Eigen::MatrixXcd& ta = prep.base_t;
    const Eigen::MatrixXcd& tf = prep.fiber_t;
    const Eigen::MatrixXcd tf_inv = tf.inverse();

    const auto layout_owner = TruncatedSeries(n, cap);
    const auto layout = layout_owner.layout();

    GermComposer gamma_composer(prep.gamma.components());
    GermComposer ta_composer(MapGerm::linear(ta, cap).components());
    const SeriesMatrix jac = jacobian(prep.gamma);
    const SeriesMatrix phi_inv = invert_series_matrix(prep.phi);

    // Running pullback of the partial solution; its degree-d slice is the
    // inhomogeneous data c_d once degrees < d are solved and folded in.
    std::vector<SeriesMatrix> running;
    running.reserve(std::size_t(n));
    for (int j = 0; j < n; ++j)
        running.push_back(phi_inv * differentiate_entries(prep.phi, j));

    std::vector<SeriesMatrix> theta_legs(std::size_t(n), SeriesMatrix(r, r, n, cap));
    double min_gap = std::numeric_limits<double>::infinity();
    std::map<int, int> resonant_counts;

    for (int d = 0; d < cap; ++d) {
        const std::vector<PackedKey> keys = layout->degree_keys(d);
        const int m_count = int(keys.size());
        const auto key_index = [&](const PackedKey& k) {
            return int(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
        };

        // Inhomogeneous blocks for this degree.
        std::vector<Eigen::MatrixXcd> rho(std::size_t(m_count * n),
                                          Eigen::MatrixXcd::Zero(r, r));
        double scale_d = 1.0;
        for (int j = 0; j < n; ++j)
            for (int u = 0; u < r; ++u)
                for (int v = 0; v < r; ++v)
                    for (const auto& [k, c] : running[std::size_t(j)].at(u, v).raw_terms()) {
                        if (key_degree(k) != d) continue;
                        rho[std::size_t(key_index(k) * n + j)](u, v) = c;
                        scale_d = std::max(scale_d, std::abs(c));
                    }

        std::vector<Eigen::MatrixXcd> solved(std::size_t(m_count * n),
                                             Eigen::MatrixXcd::Zero(r, r));

        const auto solve_block = [&](int t, int l) {
            Complex mu = ta(l, l);
            const std::vector<int> exps = layout->unpack(keys[std::size_t(t)]);
            for (int k = 0; k < n; ++k)
                for (int e = 0; e < exps[std::size_t(k)]; ++e) mu *= ta(k, k);

            const Eigen::MatrixXcd b = tf * rho[std::size_t(t * n + l)];
            Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(r, r);
            for (int u = r - 1; u >= 0; --u)
                for (int v = 0; v < r; ++v) {
                    Complex num = b(u, v);
                    for (int u2 = u + 1; u2 < r; ++u2) num -= tf(u, u2) * x(u2, v);
                    for (int v2 = 0; v2 < v; ++v2) num += mu * x(u, v2) * tf(v2, v);
                    const Complex pivot = tf(u, u) - mu * tf(v, v);
                    if (std::abs(pivot) <= pivot_tol * std::abs(tf(u, u))) {
                        if (std::abs(num) <= pivot_tol * scale_d) {
                            ++resonant_counts[d];  // consistent: minimal-norm choice
                            continue;
                        }
                        throw ResonanceObstructionError(
                            "connection obstruction: unit weight with nonzero data at degree " +
                                std::to_string(d),
                            d);
                    }
                    min_gap = std::min(min_gap, std::abs(pivot) / std::abs(tf(u, u)));
                    x(u, v) = num / pivot;
                }
            solved[std::size_t(t * n + l)] = x;
            if (x.isZero(0.0)) return;

            // Feed the solved block into every later block it dominates.
            const Eigen::MatrixXcd g = tf_inv * x * tf;
            const TruncatedSeries& expansion =
                ta_composer.power(MonomialIndex(exps));
            for (const auto& [pk, pc] : expansion.raw_terms()) {
                const int t2 = key_index(pk);
                for (int j2 = l; j2 < n; ++j2) {
                    if (ta(l, j2) == Complex(0.0, 0.0)) continue;
                    if (t2 == t && j2 == l) continue;
                    rho[std::size_t(t2 * n + j2)] += pc * ta(l, j2) * g;
                }
            }
        };

        if (ordering == SolveOrdering::degree_major) {
            for (int t = m_count - 1; t >= 0; --t)
                for (int l = 0; l < n; ++l) solve_block(t, l);
        } else {
            for (int l = 0; l < n; ++l)
                for (int t = m_count - 1; t >= 0; --t) solve_block(t, l);
        }

        // Assemble this degree's legs and fold their pullback into the
        // running series so the next degree sees them as inhomogeneous data.
        std::vector<SeriesMatrix> degree_legs(std::size_t(n), SeriesMatrix(r, r, n, cap));
        bool any = false;
        for (int l = 0; l < n; ++l)
            for (int u = 0; u < r; ++u)
                for (int v = 0; v < r; ++v) {
                    std::vector<std::pair<PackedKey, Complex>> terms;
                    for (int t = 0; t < m_count; ++t) {
                        const Complex c = solved[std::size_t(t * n + l)](u, v);
                        if (c != Complex(0.0, 0.0)) terms.emplace_back(keys[std::size_t(t)], c);
                    }
                    if (terms.empty()) continue;
                    any = true;
                    degree_legs[std::size_t(l)].at(u, v) =
                        TruncatedSeries::from_raw(layout, std::move(terms));
                }
        if (any) {
            for (int l = 0; l < n; ++l) theta_legs[std::size_t(l)] += degree_legs[std::size_t(l)];
            if (d + 1 < cap) {
                std::vector<SeriesMatrix> delta =
                    pull_form_legs(degree_legs, gamma_composer, jac, phi_inv, prep.phi);
                for (int j = 0; j < n; ++j) running[std::size_t(j)] += delta[std::size_t(j)];
            }
        }
    }

    // Return to the original coordinates and frame.
    ConnectionForm theta(r, n, cap);
    if (prep.plain) {
        for (int l = 0; l < n; ++l) theta.leg(l) = theta_legs[std::size_t(l)];
    } else {
        const Eigen::MatrixXcd qh = prep.base_q.adjoint();
        GermComposer into_qh(MapGerm::linear(qh, cap).components());
        const SeriesMatrix c_mat = SeriesMatrix::constant(prep.fiber_c, n, cap);
        const SeriesMatrix ch_mat = SeriesMatrix::constant(prep.fiber_c.adjoint(), n, cap);
        std::vector<SeriesMatrix> shifted;
        shifted.reserve(std::size_t(n));
        for (int j = 0; j < n; ++j)
            shifted.push_back(compose_entries(theta_legs[std::size_t(j)], into_qh));
        for (int l2 = 0; l2 < n; ++l2) {
            SeriesMatrix acc(r, r, n, cap);
            for (int j = 0; j < n; ++j) {
                if (qh(j, l2) == Complex(0.0, 0.0)) continue;
                acc += shifted[std::size_t(j)] * qh(j, l2);
            }
            theta.leg(l2) = c_mat * acc * ch_mat;
        }
    }

    ConnectionForm pulled = gauge_pullback(theta, bundle);
    double residual = 0.0;
    for (int l = 0; l < n; ++l) {
        SeriesMatrix diff = pulled.leg(l) - theta.leg(l);
        residual = std::max(residual, max_abs_through(diff, cap - 1));
    }

    std::vector<ConnectionWarning> warnings;
    for (const auto& [deg, count] : resonant_counts)
        warnings.push_back(
            {deg, "degree " + std::to_string(deg) + ": " + std::to_string(count) +
                      " unit-weight direction(s) with consistent data; minimal-norm choice"});

    return ConnectionReport{std::move(theta), residual, min_gap,
                            min_gap < kIllConditionedFloor, std::move(warnings)};
}

// ---------------------------------------------------- curvature and torsion

CurvatureForm curvature(const ConnectionForm& theta) {
    const int n = theta.dimension();
    CurvatureForm f(theta.rank(), n, theta.cap());
    for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l)
            f.block(k, l) = differentiate_entries(theta.leg(l), k) -
                            differentiate_entries(theta.leg(k), l) +
                            theta.leg(k) * theta.leg(l) - theta.leg(l) * theta.leg(k);
    return f;
}

TorsionTensor torsion(const ConnectionForm& theta) {
    const int n = theta.dimension();
    if (theta.rank() != n)
        throw Error(ErrorCode::rank_mismatch,
                    "torsion needs rank equal to base dimension");
    TorsionTensor t(n, theta.cap());
    for (int l = 0; l < n; ++l)
        for (int m = l + 1; m < n; ++m)
            for (int i = 0; i < n; ++i)
                t.block(l, m).at(i, 0) = theta.leg(l).at(i, m) - theta.leg(m).at(i, l);
    return t;
}

// ------------------------------------------------------------------ coframe

CoframeReport parallel_coframe(const ConnectionForm& theta, double tol) {
    const int n = theta.dimension();
    const int cap = theta.cap();
    if (theta.rank() != n)
        throw Error(ErrorCode::rank_mismatch, "coframe needs rank equal to base dimension");

    const double theta_scale = std::max(1.0, theta.max_abs_coeff());
    const double flat = curvature(theta).max_abs_coeff_through(cap - 2);
    if (flat > tol * theta_scale)
        throw Error(ErrorCode::not_flat, "curvature residual " + std::to_string(flat) +
                                             " blocks the parallel transport solve");

    const auto layout_owner = TruncatedSeries(n, cap);
    const auto layout = layout_owner.layout();
    SeriesMatrix omega = SeriesMatrix::identity(n, n, cap);
    double spread = 0.0;

    for (int e = 1; e <= cap; ++e) {
        // Degree-(e-1) slices of Ω·θ_l use only the already-known part of Ω.
        std::vector<SeriesMatrix> rhs;
        rhs.reserve(std::size_t(n));
        for (int l = 0; l < n; ++l) rhs.push_back(omega * theta.leg(l));

        for (const PackedKey& key : layout->degree_keys(e)) {
            const std::vector<int> exps = layout->unpack(key);
            const MonomialIndex m(exps);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Complex sum(0.0, 0.0);
                    int routes = 0;
                    for (int l = 0; l < n; ++l) {
                        if (exps[std::size_t(l)] == 0) continue;
                        std::vector<int> prev = exps;
                        --prev[std::size_t(l)];
                        sum += rhs[std::size_t(l)].at(i, j).coefficient(MonomialIndex(prev)) /
                               double(exps[std::size_t(l)]);
                        ++routes;
                    }
                    const Complex value = sum / double(routes);
                    if (routes > 1) {
                        for (int l = 0; l < n; ++l) {
                            if (exps[std::size_t(l)] == 0) continue;
                            std::vector<int> prev = exps;
                            --prev[std::size_t(l)];
                            const Complex candidate =
                                rhs[std::size_t(l)].at(i, j).coefficient(MonomialIndex(prev)) /
                                double(exps[std::size_t(l)]);
                            spread = std::max(spread, std::abs(candidate - value));
                        }
                    }
                    if (value != Complex(0.0, 0.0)) omega.at(i, j).set_coefficient(m, value);
                }
        }
    }

    double closed = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                TruncatedSeries diff =
                    omega.at(i, j).differentiate(k) - omega.at(i, k).differentiate(j);
                closed = std::max(closed, diff.max_abs_coeff());
            }

    return CoframeReport{std::move(omega), spread, closed};
}

DevelopingReport developing_coordinates(const SeriesMatrix& omega, double tol) {
    const int n = omega.dimension();
    const int cap = omega.cap();
    if (omega.rows() != n || omega.cols() != n)
        throw Error(ErrorCode::dimension_mismatch,
                    "developing coordinates need an n x n coefficient matrix");

    const auto layout_owner = TruncatedSeries(n, cap);
    const auto layout = layout_owner.layout();
    const double omega_scale = std::max(1.0, omega.max_abs_coeff());
    double spread = 0.0;

    std::vector<TruncatedSeries> z(std::size_t(n), TruncatedSeries(n, cap));
    for (int e = 1; e <= cap; ++e)
        for (const PackedKey& key : layout->degree_keys(e)) {
            const std::vector<int> exps = layout->unpack(key);
            const MonomialIndex m(exps);
            for (int i = 0; i < n; ++i) {
                Complex sum(0.0, 0.0);
                int routes = 0;
                for (int j = 0; j < n; ++j) {
                    if (exps[std::size_t(j)] == 0) continue;
                    std::vector<int> prev = exps;
                    --prev[std::size_t(j)];
                    sum += omega.at(i, j).coefficient(MonomialIndex(prev)) /
                           double(exps[std::size_t(j)]);
                    ++routes;
                }
                const Complex value = sum / double(routes);
                if (routes > 1)
                    for (int j = 0; j < n; ++j) {
                        if (exps[std::size_t(j)] == 0) continue;
                        std::vector<int> prev = exps;
                        --prev[std::size_t(j)];
                        const Complex candidate =
                            omega.at(i, j).coefficient(MonomialIndex(prev)) /
                            double(exps[std::size_t(j)]);
                        spread = std::max(spread, std::abs(candidate - value));
                    }
                if (value != Complex(0.0, 0.0)) z[std::size_t(i)].set_coefficient(m, value);
            }
        }

    if (spread > tol * omega_scale)
        throw Error(ErrorCode::not_closed,
                    "antiderivative spread " + std::to_string(spread) +
                        " exceeds tolerance: the 1-forms are not closed");
    return DevelopingReport{MapGerm(std::move(z)), spread};
}

// ----------------------------------------------------------------- pipeline

ConnectionPipelineReport linearize_via_connection(const MapGerm& g, double tol,
                                                  SolveOrdering ordering) {
    const EquivariantBundle bundle = EquivariantBundle::tangent(g);
    ConnectionReport conn = solve_equivariant_connection(bundle, tol, ordering);

    const int cap = g.cap();
    const double curv = curvature(conn.theta).max_abs_coeff_through(cap - 2);
    const double tors = torsion(conn.theta).max_abs_coeff();

    CoframeReport coframe = parallel_coframe(conn.theta, tol);
    DevelopingReport dev = developing_coordinates(coframe.omega, tol);

    MapGerm normalized = MapGerm::linear(g.linear_part(), cap);
    const double conjugacy = verify_conjugacy(dev.coordinates, g, normalized);

    return ConnectionPipelineReport{std::move(dev.coordinates),
                                    std::move(normalized),
                                    conjugacy,
                                    conn.fixed_point_residual,
                                    curv,
                                    tors,
                                    coframe.spread,
                                    coframe.closedness_residual,
                                    dev.spread,
                                    conn.min_weight_gap,
                                    conn.ill_conditioned,
                                    std::move(conn.warnings)};
}

}  // namespace hopf
