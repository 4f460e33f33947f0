#include "hopf/tensor.hpp"

#include <Eigen/LU>

#include "hopf/errors.hpp"

namespace hopf {

namespace {

void require_same_shape(const SeriesMatrix& a, const SeriesMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.dimension() != b.dimension() ||
        a.cap() != b.cap())
        throw Error(ErrorCode::dimension_mismatch, "series matrices disagree in shape");
}

}  // namespace

SeriesMatrix::SeriesMatrix(int rows, int cols, int dimension, int cap)
    : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw Error(ErrorCode::invalid_argument, "series matrix needs positive shape");
    entries_.assign(std::size_t(rows * cols), TruncatedSeries(dimension, cap));
}

SeriesMatrix SeriesMatrix::identity(int size, int dimension, int cap) {
    SeriesMatrix m(size, size, dimension, cap);
    for (int i = 0; i < size; ++i)
        m.at(i, i) = TruncatedSeries::constant(dimension, cap, Complex(1.0, 0.0));
    return m;
}

SeriesMatrix SeriesMatrix::constant(const Eigen::MatrixXcd& value, int dimension, int cap) {
    SeriesMatrix m(int(value.rows()), int(value.cols()), dimension, cap);
    for (int i = 0; i < value.rows(); ++i)
        for (int j = 0; j < value.cols(); ++j)
            if (value(i, j) != Complex(0.0, 0.0))
                m.at(i, int(j)) = TruncatedSeries::constant(dimension, cap, value(i, j));
    return m;
}

Eigen::MatrixXcd SeriesMatrix::value_at_zero() const {
    Eigen::MatrixXcd v(rows_, cols_);
    const MonomialIndex one = MonomialIndex::zero(dimension());
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) v(i, j) = at(i, j).coefficient(one);
    return v;
}

SeriesMatrix SeriesMatrix::transpose() const {
    SeriesMatrix t(cols_, rows_, dimension(), cap());
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

double SeriesMatrix::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.max_abs_coeff());
    return m;
}

bool SeriesMatrix::is_zero() const {
    for (const auto& e : entries_)
        if (!e.is_zero()) return false;
    return true;
}

SeriesMatrix& SeriesMatrix::operator+=(const SeriesMatrix& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += rhs.entries_[k];
    return *this;
}

SeriesMatrix& SeriesMatrix::operator-=(const SeriesMatrix& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= rhs.entries_[k];
    return *this;
}

SeriesMatrix& SeriesMatrix::operator*=(Complex scale) {
    for (auto& e : entries_) e *= scale;
    return *this;
}

SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
    if (a.cols() != b.rows() || a.dimension() != b.dimension() || a.cap() != b.cap())
        throw Error(ErrorCode::dimension_mismatch, "series matrix product shape mismatch");
    SeriesMatrix out(a.rows(), b.cols(), a.dimension(), a.cap());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const TruncatedSeries& left = a.at(i, k);
            if (left.is_zero()) continue;
            for (int j = 0; j < b.cols(); ++j) {
                if (b.at(k, j).is_zero()) continue;
                out.at(i, j) += left * b.at(k, j);
            }
        }
    return out;
}

SeriesMatrix jacobian(const MapGerm& g) {
    const int n = g.dimension();
    SeriesMatrix j(n, n, n, g.cap());
    for (int i = 0; i < n; ++i)
        for (int v = 0; v < n; ++v) j.at(i, v) = g.component(i).differentiate(v);
    return j;
}

SeriesMatrix compose_entries(const SeriesMatrix& m, GermComposer& composer) {
    if (m.dimension() != composer.dimension() || m.cap() != composer.cap())
        throw Error(ErrorCode::dimension_mismatch,
                    "series matrix disagrees with substitution target");
    SeriesMatrix out(m.rows(), m.cols(), m.dimension(), m.cap());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!m.at(i, j).is_zero()) out.at(i, j) = composer.compose(m.at(i, j));
    return out;
}

SeriesMatrix differentiate_entries(const SeriesMatrix& m, int var) {
    SeriesMatrix out(m.rows(), m.cols(), m.dimension(), m.cap());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) out.at(i, j) = m.at(i, j).differentiate(var);
    return out;
}

SeriesMatrix invert_series_matrix(const SeriesMatrix& m) {
    if (m.rows() != m.cols())
        throw Error(ErrorCode::dimension_mismatch, "only square series matrices invert");
    const int r = m.rows();
    const Eigen::MatrixXcd m0 = m.value_at_zero();
    double scale = 1.0;
    for (int i = 0; i < r; ++i) scale *= m0.row(i).norm();
    const double det = std::abs(m0.determinant());
    if (scale == 0.0 || det <= 1e-12 * scale)
        throw Error(ErrorCode::singular_cocycle,
                    "matrix of series is singular at the base point");
    const Eigen::MatrixXcd m0_inv = m0.partialPivLu().inverse();

    // m = m0 (Id + N) with N of valuation >= 1, so
    // m^{-1} = (sum_k (-N)^k) m0^{-1} and the sum stops at the cap.
    const int n = m.dimension();
    const int cap = m.cap();
    SeriesMatrix nm = SeriesMatrix::constant(m0_inv, n, cap) * m;
    const MonomialIndex zero = MonomialIndex::zero(n);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            nm.at(i, j).set_coefficient(zero, Complex(0.0, 0.0));  // exact valuation >= 1

    SeriesMatrix acc = SeriesMatrix::identity(r, n, cap);
    SeriesMatrix term = SeriesMatrix::identity(r, n, cap);
    for (int k = 1; k <= cap; ++k) {
        term = term * nm;
        term *= Complex(-1.0, 0.0);
        if (term.is_zero()) break;
        acc += term;
    }
    return acc * SeriesMatrix::constant(m0_inv, n, cap);
}

}  // namespace hopf
