#include "hopf/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hopf/errors.hpp"
#include "jet_layout.hpp"

namespace hopf {

using detail::key_degree;
using detail::PackedKey;

namespace {

constexpr double kIllConditionedFloor = 1e-10;

bool is_identity(const Eigen::MatrixXcd& M) {
    return M == Eigen::MatrixXcd::Identity(M.rows(), M.cols());
}

bool is_diagonal(const Eigen::MatrixXcd& T) {
    for (int i = 0; i < T.rows(); ++i)
        for (int j = 0; j < T.cols(); ++j)
            if (i != j && T(i, j) != Complex(0.0, 0.0)) return false;
    return true;
}

// v ↦ M · (v ∘ Lz) componentwise; the workhorse for moving vector fields
// between the input frame and the Schur frame.
std::vector<TruncatedSeries> frame_shift(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& L,
                                         const std::vector<TruncatedSeries>& v) {
    const int n = int(v.size());
    const int cap = v.front().cap();
    GermComposer composer(MapGerm::linear(L, cap).components());
    std::vector<TruncatedSeries> substituted;
    substituted.reserve(std::size_t(n));
    for (const auto& comp : v) substituted.push_back(composer.compose(comp));
    std::vector<TruncatedSeries> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        TruncatedSeries s(n, cap);
        for (int j = 0; j < n; ++j)
            if (M(i, j) != Complex(0.0, 0.0)) s += substituted[std::size_t(j)] * M(i, j);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

HomologicalSolution homological_solve(const SpectralData& s, int degree,
                                      const std::vector<TruncatedSeries>& r,
                                      double pivot_tol) {
    const int n = int(s.schur_t.rows());
    if (int(r.size()) != n)
        throw Error(ErrorCode::dimension_mismatch, "field has wrong number of components");
    const auto layout = r.front().layout();
    const int cap = r.front().cap();
    if (r.front().dimension() != n)
        throw Error(ErrorCode::dimension_mismatch, "field dimension differs from matrix");
    if (degree < 2 || degree > cap)
        throw Error(ErrorCode::invalid_argument, "graded solve needs 2 <= degree <= cap");
    bool all_zero = true;
    for (const auto& comp : r) {
        if (comp.layout() != layout)
            throw Error(ErrorCode::dimension_mismatch, "field components disagree in cap");
        for (const auto& [k, c] : comp.raw_terms())
            if (key_degree(k) != degree)
                throw Error(ErrorCode::invalid_argument, "field is not homogeneous of the degree");
        all_zero = all_zero && comp.is_zero();
    }

    HomologicalSolution out;
    out.small_divisor = std::numeric_limits<double>::infinity();
    if (all_zero) {
        out.h.assign(std::size_t(n), TruncatedSeries(n, cap));
        out.unsolved = out.h;
        return out;
    }

    const Eigen::MatrixXcd& Q = s.schur_q;
    const Eigen::MatrixXcd& T = s.schur_t;
    const bool plain_frame = is_identity(Q);
    const bool diagonal = is_diagonal(T);

    // Move r into the Schur frame: r̃ = Q* · (r ∘ Qz).
    std::vector<TruncatedSeries> rt =
        plain_frame ? r : frame_shift(Q.adjoint(), Q, r);

    const std::vector<PackedKey> keys = layout->degree_keys(degree);
    const int M = int(keys.size());
    const auto key_index = [&](const PackedKey& k) {
        return int(std::lower_bound(keys.begin(), keys.end(), k) - keys.begin());
    };

    std::vector<std::vector<int>> exps;
    exps.reserve(std::size_t(M));
    std::vector<Complex> lead(std::size_t(M), Complex(0.0, 0.0));
    for (int t = 0; t < M; ++t) {
        exps.push_back(layout->unpack(keys[std::size_t(t)]));
        Complex prod(1.0, 0.0);
        for (int j = 0; j < n; ++j)
            for (int e = 0; e < exps.back()[std::size_t(j)]; ++e) prod *= T(j, j);
        lead[std::size_t(t)] = prod;
    }

    std::vector<std::vector<Complex>> rho(
        std::size_t(n), std::vector<Complex>(std::size_t(M), Complex(0.0, 0.0)));
    double r_scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (const auto& [k, c] : rt[std::size_t(i)].raw_terms()) {
            rho[std::size_t(i)][std::size_t(key_index(k))] = c;
            r_scale = std::max(r_scale, std::abs(c));
        }
    const double residue_floor = 1e-14 * r_scale;

    // Substitution spread (Tw)^m, shared across directions. Only needed when
    // T has off-diagonal entries.
    GermComposer spread(MapGerm::linear(T, cap).components());

    std::vector<std::vector<Complex>> hc(
        std::size_t(n), std::vector<Complex>(std::size_t(M), Complex(0.0, 0.0)));

    // The operator is triangular: a direction (i, m) feeds only components
    // i' < i at the same monomial and lex-smaller monomials at the same
    // component, so one descending pass is a complete back-substitution.
    for (int t = M - 1; t >= 0; --t) {
        for (int i = n - 1; i >= 0; --i) {
            const Complex pivot = T(i, i) - lead[std::size_t(t)];
            const Complex c = rho[std::size_t(i)][std::size_t(t)];
            if (std::abs(pivot) <= pivot_tol * std::abs(T(i, i))) {
                if (std::abs(c) > residue_floor)
                    out.resonant_directions.emplace_back(
                        i, MonomialIndex(exps[std::size_t(t)]));
                continue;  // kernel direction: h component stays zero
            }
            out.small_divisor = std::min(out.small_divisor, std::abs(pivot));
            if (c == Complex(0.0, 0.0)) continue;
            const Complex x = c / pivot;
            hc[std::size_t(i)][std::size_t(t)] = x;
            rho[std::size_t(i)][std::size_t(t)] = Complex(0.0, 0.0);  // eliminated exactly
            for (int i2 = 0; i2 < i; ++i2)
                if (T(i2, i) != Complex(0.0, 0.0))
                    rho[std::size_t(i2)][std::size_t(t)] -= x * T(i2, i);
            if (!diagonal) {
                const TruncatedSeries& pm =
                    spread.power(MonomialIndex(exps[std::size_t(t)]));
                for (const auto& [pk, pc] : pm.raw_terms()) {
                    if (pk == keys[std::size_t(t)]) continue;  // lead handled via the pivot
                    rho[std::size_t(i)][std::size_t(key_index(pk))] += x * pc;
                }
            }
        }
    }

    const auto to_series = [&](const std::vector<std::vector<Complex>>& dense) {
        std::vector<TruncatedSeries> fields;
        fields.reserve(std::size_t(n));
        for (int i = 0; i < n; ++i) {
            std::vector<std::pair<PackedKey, Complex>> terms;
            for (int t = 0; t < M; ++t)
                if (dense[std::size_t(i)][std::size_t(t)] != Complex(0.0, 0.0))
                    terms.emplace_back(keys[std::size_t(t)],
                                       dense[std::size_t(i)][std::size_t(t)]);
            fields.push_back(TruncatedSeries::from_raw(layout, std::move(terms)));
        }
        return fields;
    };

    std::vector<TruncatedSeries> ht = to_series(hc);
    std::vector<TruncatedSeries> rest = to_series(rho);
    if (plain_frame) {
        out.h = std::move(ht);
        out.unsolved = std::move(rest);
    } else {
        out.h = frame_shift(Q, Q.adjoint(), ht);
        out.unsolved = frame_shift(Q, Q.adjoint(), rest);
    }
    return out;
}

namespace {

struct SweepState {
    MapGerm change;
    MapGerm conjugated;
    std::vector<std::pair<int, MonomialIndex>> kept;
    double small_divisor = std::numeric_limits<double>::infinity();
};

SweepState dulac_sweep(const MapGerm& g, const SpectralData& s, double tol,
                       bool keep_resonant) {
    const int n = g.dimension();
    const int cap = g.cap();
    const double pivot_tol = std::max(tol, 1e-13);
    SweepState state{MapGerm::identity(n, cap), g, {}, std::numeric_limits<double>::infinity()};

    for (int d = 2; d <= cap; ++d) {
        std::vector<TruncatedSeries> r;
        r.reserve(std::size_t(n));
        bool any = false;
        for (int i = 0; i < n; ++i) {
            r.push_back(state.conjugated.component(i).graded_component(d));
            any = any || !r.back().is_zero();
        }
        if (!any) continue;

        HomologicalSolution sol = homological_solve(s, d, r, pivot_tol);
        if (!sol.resonant_directions.empty() && !keep_resonant)
            throw Error(ErrorCode::resonant_input,
                        "resonant obstruction at degree " + std::to_string(d) +
                            " cannot be eliminated");
        for (auto& dir : sol.resonant_directions) state.kept.push_back(std::move(dir));
        state.small_divisor = std::min(state.small_divisor, sol.small_divisor);

        bool h_zero = true;
        for (const auto& comp : sol.h) h_zero = h_zero && comp.is_zero();
        if (h_zero) continue;

        std::vector<TruncatedSeries> w_comps = MapGerm::identity(n, cap).components();
        for (int i = 0; i < n; ++i) w_comps[std::size_t(i)] += sol.h[std::size_t(i)];
        MapGerm W(std::move(w_comps));
        state.conjugated = compose_germs(compose_germs(W, state.conjugated), invert_germ(W));
        state.change = compose_germs(W, state.change);
    }
    return state;
}

}  // namespace

NormalFormReport linearize(const MapGerm& g, double tol) {
    const SpectralData s = eigen_decompose(g.linear_part());
    require_contraction(s.eigenvalues);
    const ResonanceScan scan = matrix_resonances(s, tol);
    if (!scan.relations.empty()) {
        const auto& rel = scan.relations.front();
        throw Error(ErrorCode::resonant_input,
                    "resonant input: eigenvalue " + std::to_string(rel.target + 1) +
                        " equals the relation " + rel.exponents.str() +
                        " evaluated on the spectrum");
    }

    SweepState state = dulac_sweep(g, s, tol, /*keep_resonant=*/false);
    const MapGerm target = MapGerm::linear(g.linear_part(), g.cap());
    NormalFormReport report{std::move(state.change), target, {},
                            0.0, state.small_divisor,
                            state.small_divisor < kIllConditionedFloor};
    report.max_residual = verify_conjugacy(report.change, g, report.normalized);
    return report;
}

NormalFormReport normal_form(const MapGerm& g, double tol) {
    const SpectralData s = eigen_decompose(g.linear_part());
    require_contraction(s.eigenvalues);
    const double pivot_tol = std::max(tol, 1e-13);

    SweepState state = dulac_sweep(g, s, tol, /*keep_resonant=*/true);

    // Off-normal-form dust: coefficients of the conjugated germ, viewed in
    // the Schur frame, living in directions with pivots above the tolerance.
    const bool plain_frame = is_identity(s.schur_q);
    std::vector<TruncatedSeries> tilde =
        plain_frame ? state.conjugated.components()
                    : frame_shift(s.schur_q.adjoint(), s.schur_q,
                                  state.conjugated.components());
    double off = 0.0;
    const int n = g.dimension();
    for (int i = 0; i < n; ++i) {
        for (const auto& [m, c] : tilde[std::size_t(i)].terms()) {
            if (m.total_degree() < 2) continue;
            Complex prod(1.0, 0.0);
            for (int j = 0; j < n; ++j)
                for (int e = 0; e < m[j]; ++e) prod *= s.schur_t(j, j);
            const Complex pivot = s.schur_t(i, i) - prod;
            if (std::abs(pivot) > pivot_tol * std::abs(s.schur_t(i, i)))
                off = std::max(off, std::abs(c));
        }
    }

    NormalFormReport report{std::move(state.change), std::move(state.conjugated),
                            std::move(state.kept), off, state.small_divisor,
                            state.small_divisor < kIllConditionedFloor};
    return report;
}

}  // namespace hopf
