#include "hopf/germ.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "hopf/errors.hpp"

namespace hopf {

namespace {

// Invertibility is judged against the Hadamard bound so the test is scale
// free: |det A| / prod(row norms) <= 1e-12 counts as singular.
void require_invertible(const Eigen::MatrixXcd& A) {
    const int n = int(A.rows());
    double scale = 1.0;
    for (int i = 0; i < n; ++i) scale *= A.row(i).norm();
    const double det = std::abs(A.determinant());
    if (scale == 0.0 || det <= 1e-12 * scale)
        throw Error(ErrorCode::singular_linear_part, "linear part is not invertible");
}

std::vector<TruncatedSeries> apply_matrix(const Eigen::MatrixXcd& M,
                                          const std::vector<TruncatedSeries>& v) {
    const int n = int(v.size());
    std::vector<TruncatedSeries> out;
    out.reserve(std::size_t(n));
    for (int i = 0; i < int(M.rows()); ++i) {
        TruncatedSeries s(v.front().dimension(), v.front().cap());
        for (int j = 0; j < n; ++j)
            if (M(i, j) != Complex(0.0, 0.0)) s += v[std::size_t(j)] * M(i, j);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

MapGerm::MapGerm(std::vector<TruncatedSeries> components) : components_(std::move(components)) {
    if (components_.empty())
        throw Error(ErrorCode::invalid_argument, "germ needs at least one component");
    const auto& layout = components_.front().layout();
    if (components_.front().dimension() != int(components_.size()))
        throw Error(ErrorCode::dimension_mismatch,
                    "germ needs one component per ambient variable");
    const int n = dimension();
    double scale = 0.0;
    for (const auto& c : components_) {
        if (c.layout() != layout)
            throw Error(ErrorCode::dimension_mismatch,
                        "germ components disagree in dimension or cap");
        scale = std::max(scale, c.max_abs_coeff());
    }
    const MonomialIndex origin = MonomialIndex::zero(n);
    for (auto& c : components_) {
        const Complex c0 = c.coefficient(origin);
        if (std::abs(c0) > 1e-12 * std::max(1.0, scale))
            throw Error(ErrorCode::non_germ, "germ component has a nonzero constant term");
        if (c0 != Complex(0.0, 0.0)) c.set_coefficient(origin, Complex(0.0, 0.0));
    }
    linear_part_ = Eigen::MatrixXcd(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            linear_part_(i, j) = components_[std::size_t(i)].coefficient(MonomialIndex::unit(n, j));
    require_invertible(linear_part_);
}

MapGerm MapGerm::identity(int dimension, int cap) {
    std::vector<TruncatedSeries> comps;
    comps.reserve(std::size_t(dimension));
    for (int i = 0; i < dimension; ++i)
        comps.push_back(TruncatedSeries::variable(dimension, cap, i));
    return MapGerm(std::move(comps));
}

MapGerm MapGerm::linear(const Eigen::MatrixXcd& A, int cap) {
    if (A.rows() != A.cols())
        throw Error(ErrorCode::invalid_argument, "linear germ needs a square matrix");
    const int n = int(A.rows());
    std::vector<TruncatedSeries> comps;
    comps.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        TruncatedSeries s(n, cap);
        for (int j = 0; j < n; ++j)
            s.set_coefficient(MonomialIndex::unit(n, j), A(i, j));
        comps.push_back(std::move(s));
    }
    return MapGerm(std::move(comps));
}

double MapGerm::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs_coeff());
    return m;
}

double MapGerm::nonlinear_max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : components_)
        for (const auto& [key, coeff] : c.raw_terms())
            if (detail::key_degree(key) >= 2) m = std::max(m, std::abs(coeff));
    return m;
}

MapGerm compose_germs(const MapGerm& outer, const MapGerm& inner) {
    if (outer.dimension() != inner.dimension() || outer.cap() != inner.cap())
        throw Error(ErrorCode::dimension_mismatch, "germs disagree in dimension or cap");
    GermComposer composer(inner.components());
    std::vector<TruncatedSeries> comps;
    comps.reserve(std::size_t(outer.dimension()));
    for (int i = 0; i < outer.dimension(); ++i)
        comps.push_back(composer.compose(outer.component(i)));
    return MapGerm(std::move(comps));
}

MapGerm compose_germs(const MapGerm& a, const MapGerm& b, const MapGerm& c) {
    return compose_germs(a, compose_germs(b, c));
}

MapGerm invert_germ(const MapGerm& g) {
    const int n = g.dimension();
    const int cap = g.cap();
    const Eigen::MatrixXcd inv_linear = g.linear_part().partialPivLu().inverse();

    // Nonlinear part N := g − A·z (valuation ≥ 2).
    std::vector<TruncatedSeries> nonlinear;
    nonlinear.reserve(std::size_t(n));
    bool has_nonlinear = false;
    for (int i = 0; i < n; ++i) {
        TruncatedSeries s = g.component(i);
        for (int j = 0; j < n; ++j)
            s.set_coefficient(MonomialIndex::unit(n, j), Complex(0.0, 0.0));
        has_nonlinear = has_nonlinear || !s.is_zero();
        nonlinear.push_back(std::move(s));
    }
    MapGerm h = MapGerm::linear(inv_linear, cap);
    if (!has_nonlinear) return h;

    std::vector<TruncatedSeries> id_comps = MapGerm::identity(n, cap).components();
    // h ← A⁻¹·(id − N∘h); each pass extends the degree of exactness, and the
    // exact-equality exit fires early when N is concentrated in high degrees.
    for (int pass = 1; pass < cap; ++pass) {
        GermComposer composer(h.components());
        std::vector<TruncatedSeries> rhs;
        rhs.reserve(std::size_t(n));
        for (int i = 0; i < n; ++i)
            rhs.push_back(id_comps[std::size_t(i)] - composer.compose(nonlinear[std::size_t(i)]));
        MapGerm next(apply_matrix(inv_linear, rhs));
        bool unchanged = true;
        for (int i = 0; i < n && unchanged; ++i)
            unchanged = next.component(i).raw_terms() == h.component(i).raw_terms();
        h = std::move(next);
        if (unchanged) break;
    }
    return h;
}

double verify_conjugacy(const MapGerm& U, const MapGerm& g, const MapGerm& target) {
    if (U.dimension() != g.dimension() || U.cap() != g.cap() ||
        target.dimension() != g.dimension() || target.cap() != g.cap())
        throw Error(ErrorCode::dimension_mismatch, "germs disagree in dimension or cap");
    const MapGerm conj = compose_germs(compose_germs(U, g), invert_germ(U));
    double residual = 0.0;
    for (int i = 0; i < g.dimension(); ++i) {
        const TruncatedSeries diff = conj.component(i) - target.component(i);
        residual = std::max(residual, diff.max_abs_coeff());
    }
    return residual;
}

}  // namespace hopf
