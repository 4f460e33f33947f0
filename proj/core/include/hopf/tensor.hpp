#pragma once

#include <Eigen/Core>

#include "hopf/germ.hpp"
#include "hopf/series.hpp"

namespace hopf {

// Rectangular matrix whose entries are truncated series sharing one
// (dimension, cap) layout. The workhorse carrier for cocycles, connection
// legs, and coframes.
class SeriesMatrix {
public:
    SeriesMatrix(int rows, int cols, int dimension, int cap);
    static SeriesMatrix identity(int size, int dimension, int cap);
    static SeriesMatrix constant(const Eigen::MatrixXcd& value, int dimension, int cap);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int dimension() const { return entries_.front().dimension(); }
    int cap() const { return entries_.front().cap(); }

    TruncatedSeries& at(int i, int j) { return entries_[std::size_t(i * cols_ + j)]; }
    const TruncatedSeries& at(int i, int j) const {
        return entries_[std::size_t(i * cols_ + j)];
    }

    Eigen::MatrixXcd value_at_zero() const;
    SeriesMatrix transpose() const;
    double max_abs_coeff() const;
    bool is_zero() const;

    SeriesMatrix& operator+=(const SeriesMatrix& rhs);
    SeriesMatrix& operator-=(const SeriesMatrix& rhs);
    SeriesMatrix& operator*=(Complex scale);

    friend SeriesMatrix operator+(SeriesMatrix a, const SeriesMatrix& b) { return a += b; }
    friend SeriesMatrix operator-(SeriesMatrix a, const SeriesMatrix& b) { return a -= b; }
    friend SeriesMatrix operator*(SeriesMatrix a, Complex s) { return a *= s; }
    friend SeriesMatrix operator*(Complex s, SeriesMatrix a) { return a *= s; }
    friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b);

private:
    int rows_;
    int cols_;
    std::vector<TruncatedSeries> entries_;
};

// Jacobian matrix of a germ: row i, column j holds the z_j-derivative of the
// i-th component.
SeriesMatrix jacobian(const MapGerm& g);

// Entrywise substitution z <- target through a shared composer, so monomial
// powers are memoized across all entries.
SeriesMatrix compose_entries(const SeriesMatrix& m, GermComposer& composer);

// Entrywise z_var-derivative.
SeriesMatrix differentiate_entries(const SeriesMatrix& m, int var);

// Series inverse via the Neumann expansion around the value at 0. Throws
// ErrorCode::singular_cocycle when that value is not invertible.
SeriesMatrix invert_series_matrix(const SeriesMatrix& m);

}  // namespace hopf
