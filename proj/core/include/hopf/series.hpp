#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hopf {

using Complex = std::complex<double>;

namespace detail {

// Packed exponent vector: total degree in the top byte, then one fixed-width
// field per variable, z1 most significant. Comparing the two words as a
// 128-bit unsigned integer is exactly the graded-lex order, and keys of two
// monomials add componentwise as long as the product degree stays within the
// truncation cap (fields are sized so in-cap sums never carry).
struct PackedKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const PackedKey& a, const PackedKey& b) {
        return a.hi == b.hi && a.lo == b.lo;
    }
    friend bool operator!=(const PackedKey& a, const PackedKey& b) { return !(a == b); }
    friend bool operator<(const PackedKey& a, const PackedKey& b) {
        return a.hi != b.hi ? a.hi < b.hi : a.lo < b.lo;
    }
};

inline PackedKey key_add(const PackedKey& a, const PackedKey& b) {
    return PackedKey{a.hi + b.hi, a.lo + b.lo};
}

inline int key_degree(const PackedKey& k) { return int(k.hi >> 56); }

class JetLayout;  // one shared instance per (dimension, cap); see src/jet_layout.hpp

}  // namespace detail

// Exponent vector of a monomial z1^e1 * ... * zn^en with its total degree.
class MonomialIndex {
public:
    explicit MonomialIndex(std::vector<int> exponents);
    static MonomialIndex zero(int dimension);
    static MonomialIndex unit(int dimension, int var);  // e_var, 0-based

    int dimension() const { return int(exp_.size()); }
    int total_degree() const { return degree_; }
    int operator[](int var) const { return exp_[std::size_t(var)]; }
    const std::vector<int>& exponents() const { return exp_; }

    MonomialIndex plus(const MonomialIndex& other) const;

    friend bool operator==(const MonomialIndex& a, const MonomialIndex& b) {
        return a.exp_ == b.exp_;
    }
    friend bool operator!=(const MonomialIndex& a, const MonomialIndex& b) { return !(a == b); }

    std::string str() const;  // e.g. "z1^2*z3"; "1" for the empty monomial

private:
    std::vector<int> exp_;
    int degree_ = 0;
};

// Total degree first; ties broken lexicographically with z1 most significant
// (the monomial with the smaller exponent at the first difference sorts first).
bool graded_lex_less(const MonomialIndex& a, const MonomialIndex& b);
inline bool operator<(const MonomialIndex& a, const MonomialIndex& b) {
    return graded_lex_less(a, b);
}

// Polynomial truncated at total degree `cap` over complex double coefficients.
// Every operation silently discards terms of degree > cap, then drops
// coefficients of modulus < 1e-14 * (largest coefficient modulus of the
// result). Operands must agree in both dimension and cap.
class TruncatedSeries {
public:
    TruncatedSeries(int dimension, int cap);  // zero series
    static TruncatedSeries constant(int dimension, int cap, Complex value);
    static TruncatedSeries monomial(int dimension, int cap, const MonomialIndex& m, Complex value);
    static TruncatedSeries variable(int dimension, int cap, int var);  // z_{var+1}, 0-based

    int dimension() const;
    int cap() const;

    bool is_zero() const { return terms_.empty(); }
    int term_count() const { return int(terms_.size()); }
    int valuation() const;  // lowest term degree; cap()+1 for the zero series
    double max_abs_coeff() const;

    Complex coefficient(const MonomialIndex& m) const;
    void set_coefficient(const MonomialIndex& m, Complex value);
    std::vector<std::pair<MonomialIndex, Complex>> terms() const;  // graded-lex ascending

    TruncatedSeries& operator+=(const TruncatedSeries& rhs);
    TruncatedSeries& operator-=(const TruncatedSeries& rhs);
    TruncatedSeries& operator*=(const TruncatedSeries& rhs);
    TruncatedSeries& operator*=(Complex scalar);
    TruncatedSeries operator-() const;

    TruncatedSeries reciprocal() const;  // needs a nonzero constant term
    TruncatedSeries pow(int exponent) const;  // negative exponents go through reciprocal()
    TruncatedSeries graded_component(int degree) const;
    TruncatedSeries differentiate(int var) const;
    TruncatedSeries with_cap(int new_cap) const;

    Complex evaluate(const std::vector<Complex>& point) const;

    // Canonical text form: "0" or terms joined by " + ", ascending degree and
    // z1-major inside a degree, each "(a+bi)" literal printed with enough
    // digits to round-trip. parse_series() accepts the output verbatim.
    std::string str() const;

    // Implementation access (stable storage: keys ascending).
    const std::shared_ptr<const detail::JetLayout>& layout() const { return layout_; }
    const std::vector<std::pair<detail::PackedKey, Complex>>& raw_terms() const { return terms_; }
    static TruncatedSeries from_raw(std::shared_ptr<const detail::JetLayout> layout,
                                    std::vector<std::pair<detail::PackedKey, Complex>> terms);

private:
    std::shared_ptr<const detail::JetLayout> layout_;
    std::vector<std::pair<detail::PackedKey, Complex>> terms_;

    void normalize();
    friend class GermComposer;
};

TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator*(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator*(TruncatedSeries lhs, Complex scalar);
TruncatedSeries operator*(Complex scalar, TruncatedSeries rhs);
TruncatedSeries operator/(TruncatedSeries lhs, const TruncatedSeries& rhs);
TruncatedSeries operator/(TruncatedSeries lhs, Complex scalar);

std::ostream& operator<<(std::ostream& os, const TruncatedSeries& s);

// Batch substitution f -> f(target_1, ..., target_n) for a fixed target map
// with zero constant terms. Monomial powers of the target are built by graded
// recursion and memoized, so composing many series against the same target
// shares all intermediate products.
class GermComposer {
public:
    explicit GermComposer(std::vector<TruncatedSeries> target);

    int dimension() const;
    int cap() const;

    const TruncatedSeries& power(const MonomialIndex& m);
    TruncatedSeries compose(const TruncatedSeries& f);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// One-shot form of GermComposer::compose.
TruncatedSeries compose(const TruncatedSeries& f, const std::vector<TruncatedSeries>& target);

}  // namespace hopf
