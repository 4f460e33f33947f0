#include "hopf/series.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hopf/errors.hpp"
#include "jet_layout.hpp"

namespace hopf {

using detail::DenseScratch;
using detail::JetLayout;
using detail::key_add;
using detail::key_degree;
using detail::PackedKey;
using detail::PackedKeyHash;

namespace {

constexpr double kDropRatio = 1e-14;  // relative coefficient floor after each operation

void require_same_layout(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.layout() != b.layout())
        throw Error(ErrorCode::dimension_mismatch,
                    "series operands disagree in dimension or truncation cap");
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string coefficient_literal(Complex c) {
    const double re = c.real(), im = c.imag();
    if (im == 0.0) return "(" + format_double(re) + ")";
    if (re == 0.0) return "(" + format_double(im) + "i)";
    if (im < 0.0) return "(" + format_double(re) + "-" + format_double(-im) + "i)";
    return "(" + format_double(re) + "+" + format_double(im) + "i)";
}

}  // namespace

// ---------------------------------------------------------------- MonomialIndex

MonomialIndex::MonomialIndex(std::vector<int> exponents) : exp_(std::move(exponents)) {
    if (exp_.empty())
        throw Error(ErrorCode::invalid_argument, "monomial needs at least one variable");
    for (int e : exp_) {
        if (e < 0) throw Error(ErrorCode::invalid_argument, "monomial exponents must be >= 0");
        degree_ += e;
    }
}

MonomialIndex MonomialIndex::zero(int dimension) {
    return MonomialIndex(std::vector<int>(std::size_t(dimension), 0));
}

MonomialIndex MonomialIndex::unit(int dimension, int var) {
    if (var < 0 || var >= dimension)
        throw Error(ErrorCode::invalid_argument, "variable index out of range");
    std::vector<int> e(std::size_t(dimension), 0);
    e[std::size_t(var)] = 1;
    return MonomialIndex(std::move(e));
}

MonomialIndex MonomialIndex::plus(const MonomialIndex& other) const {
    if (dimension() != other.dimension())
        throw Error(ErrorCode::dimension_mismatch, "monomial dimensions differ");
    std::vector<int> e(exp_);
    for (int i = 0; i < dimension(); ++i) e[std::size_t(i)] += other.exp_[std::size_t(i)];
    return MonomialIndex(std::move(e));
}

std::string MonomialIndex::str() const {
    std::string out;
    for (int i = 0; i < dimension(); ++i) {
        const int e = exp_[std::size_t(i)];
        if (e == 0) continue;
        if (!out.empty()) out += "*";
        out += "z" + std::to_string(i + 1);
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out.empty() ? "1" : out;
}

bool graded_lex_less(const MonomialIndex& a, const MonomialIndex& b) {
    if (a.dimension() != b.dimension())
        throw Error(ErrorCode::dimension_mismatch, "monomial dimensions differ");
    if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
    for (int i = 0; i < a.dimension(); ++i)
        if (a[i] != b[i]) return a[i] < b[i];
    return false;
}

// -------------------------------------------------------------- TruncatedSeries

TruncatedSeries::TruncatedSeries(int dimension, int cap) : layout_(JetLayout::get(dimension, cap)) {}

TruncatedSeries TruncatedSeries::constant(int dimension, int cap, Complex value) {
    TruncatedSeries s(dimension, cap);
    if (value != Complex(0.0, 0.0))
        s.terms_.emplace_back(PackedKey{}, value);
    return s;
}

TruncatedSeries TruncatedSeries::monomial(int dimension, int cap, const MonomialIndex& m,
                                          Complex value) {
    TruncatedSeries s(dimension, cap);
    if (m.dimension() != dimension)
        throw Error(ErrorCode::dimension_mismatch, "monomial dimension differs from series");
    if (m.total_degree() <= cap && value != Complex(0.0, 0.0))
        s.terms_.emplace_back(s.layout_->pack(m.exponents()), value);
    return s;
}

TruncatedSeries TruncatedSeries::variable(int dimension, int cap, int var) {
    return monomial(dimension, cap, MonomialIndex::unit(dimension, var), Complex(1.0, 0.0));
}

int TruncatedSeries::dimension() const { return layout_->dimension(); }
int TruncatedSeries::cap() const { return layout_->cap(); }

int TruncatedSeries::valuation() const {
    return terms_.empty() ? cap() + 1 : key_degree(terms_.front().first);
}

double TruncatedSeries::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

Complex TruncatedSeries::coefficient(const MonomialIndex& m) const {
    if (m.dimension() != dimension())
        throw Error(ErrorCode::dimension_mismatch, "monomial dimension differs from series");
    if (m.total_degree() > cap()) return Complex(0.0, 0.0);
    const PackedKey key = layout_->pack(m.exponents());
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const auto& term, const PackedKey& k) { return term.first < k; });
    return (it != terms_.end() && it->first == key) ? it->second : Complex(0.0, 0.0);
}

void TruncatedSeries::set_coefficient(const MonomialIndex& m, Complex value) {
    if (m.dimension() != dimension())
        throw Error(ErrorCode::dimension_mismatch, "monomial dimension differs from series");
    if (m.total_degree() > cap()) return;  // silent truncation
    const PackedKey key = layout_->pack(m.exponents());
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const auto& term, const PackedKey& k) { return term.first < k; });
    const bool present = it != terms_.end() && it->first == key;
    if (value == Complex(0.0, 0.0)) {
        if (present) terms_.erase(it);
    } else if (present) {
        it->second = value;
    } else {
        terms_.insert(it, {key, value});
    }
}

std::vector<std::pair<MonomialIndex, Complex>> TruncatedSeries::terms() const {
    std::vector<std::pair<MonomialIndex, Complex>> out;
    out.reserve(terms_.size());
    for (const auto& [k, c] : terms_) out.emplace_back(MonomialIndex(layout_->unpack(k)), c);
    return out;
}

void TruncatedSeries::normalize() {
    // Drop cancellation dust relative to the scale of its own degree, so a
    // series mixing huge high-degree and unit low-degree coefficients keeps
    // the latter intact.
    std::array<double, 256> max_abs{};
    for (const auto& [k, c] : terms_)
        max_abs[std::size_t(detail::key_degree(k))] =
            std::max(max_abs[std::size_t(detail::key_degree(k))], std::abs(c));
    std::erase_if(terms_, [&](const auto& term) {
        const double a = std::abs(term.second);
        return a == 0.0 || a < kDropRatio * max_abs[std::size_t(detail::key_degree(term.first))];
    });
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& rhs) {
    require_same_layout(*this, rhs);
    std::vector<std::pair<PackedKey, Complex>> merged;
    merged.reserve(terms_.size() + rhs.terms_.size());
    auto a = terms_.begin();
    auto b = rhs.terms_.begin();
    while (a != terms_.end() && b != rhs.terms_.end()) {
        if (a->first < b->first)
            merged.push_back(*a++);
        else if (b->first < a->first)
            merged.push_back(*b++);
        else {
            merged.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    merged.insert(merged.end(), a, terms_.end());
    merged.insert(merged.end(), b, rhs.terms_.end());
    terms_ = std::move(merged);
    normalize();
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& rhs) {
    return *this += -rhs;
}

TruncatedSeries TruncatedSeries::operator-() const {
    TruncatedSeries out(*this);
    for (auto& [k, c] : out.terms_) c = -c;
    return out;
}

TruncatedSeries& TruncatedSeries::operator*=(Complex scalar) {
    if (scalar == Complex(0.0, 0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [k, c] : terms_) c *= scalar;
    normalize();
    return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(const TruncatedSeries& rhs) {
    require_same_layout(*this, rhs);
    const int cap = this->cap();
    std::vector<std::pair<PackedKey, Complex>> result;

    if (layout_->has_ranks()) {
        auto& scratch = DenseScratch::local();
        scratch.ensure(layout_->total_count());
        for (const auto& [ka, ca] : terms_) {
            const int da = key_degree(ka);
            for (const auto& [kb, cb] : rhs.terms_) {
                if (da + key_degree(kb) > cap) break;  // rhs sorted by ascending degree
                const std::size_t r = layout_->rank_of(key_add(ka, kb));
                if (!scratch.used[r]) {
                    scratch.used[r] = 1;
                    scratch.value[r] = Complex(0.0, 0.0);
                    scratch.touched.push_back(std::uint32_t(r));
                }
                scratch.value[r] += ca * cb;
            }
        }
        std::sort(scratch.touched.begin(), scratch.touched.end());
        result.reserve(scratch.touched.size());
        const auto& keys = layout_->keys();
        for (std::uint32_t r : scratch.touched) {
            result.emplace_back(keys[r], scratch.value[r]);
            scratch.used[r] = 0;
            scratch.value[r] = Complex(0.0, 0.0);
        }
        scratch.touched.clear();
    } else {
        std::vector<std::pair<PackedKey, Complex>> raw;
        for (const auto& [ka, ca] : terms_) {
            const int da = key_degree(ka);
            for (const auto& [kb, cb] : rhs.terms_) {
                if (da + key_degree(kb) > cap) break;
                raw.emplace_back(key_add(ka, kb), ca * cb);
            }
        }
        std::sort(raw.begin(), raw.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& [k, c] : raw) {
            if (!result.empty() && result.back().first == k)
                result.back().second += c;
            else
                result.emplace_back(k, c);
        }
    }

    terms_ = std::move(result);
    normalize();
    return *this;
}

TruncatedSeries TruncatedSeries::reciprocal() const {
    const Complex c0 = terms_.empty() || key_degree(terms_.front().first) != 0
                           ? Complex(0.0, 0.0)
                           : terms_.front().second;
    if (c0 == Complex(0.0, 0.0))
        throw Error(ErrorCode::invalid_argument,
                    "series reciprocal needs a nonzero constant term");
    const TruncatedSeries one = constant(dimension(), cap(), Complex(1.0, 0.0));
    TruncatedSeries u = one - *this * (Complex(1.0, 0.0) / c0);  // valuation >= 1
    if (u.is_zero()) return one * (Complex(1.0, 0.0) / c0);
    TruncatedSeries r = one;
    for (int j = 0; j < cap(); ++j) {
        TruncatedSeries next = one + u * r;
        if (next.raw_terms() == r.raw_terms()) break;
        r = std::move(next);
    }
    return r * (Complex(1.0, 0.0) / c0);
}

TruncatedSeries TruncatedSeries::pow(int exponent) const {
    if (exponent < 0) return reciprocal().pow(-exponent);
    TruncatedSeries result = constant(dimension(), cap(), Complex(1.0, 0.0));
    TruncatedSeries base(*this);
    int k = exponent;
    while (k > 0) {
        if (k & 1) result *= base;
        k >>= 1;
        if (k > 0) base *= base;
    }
    return result;
}

TruncatedSeries TruncatedSeries::graded_component(int degree) const {
    TruncatedSeries out(dimension(), cap());
    for (const auto& [k, c] : terms_)
        if (key_degree(k) == degree) out.terms_.emplace_back(k, c);
    return out;
}

TruncatedSeries TruncatedSeries::differentiate(int var) const {
    if (var < 0 || var >= dimension())
        throw Error(ErrorCode::invalid_argument, "variable index out of range");
    std::vector<int> unit(std::size_t(dimension()), 0);
    unit[std::size_t(var)] = 1;
    const PackedKey unit_key = layout_->pack(unit);
    TruncatedSeries out(dimension(), cap());
    for (const auto& [k, c] : terms_) {
        const int e = layout_->exponent_of(k, var);
        if (e == 0) continue;
        out.terms_.emplace_back(PackedKey{k.hi - unit_key.hi, k.lo - unit_key.lo},
                                c * double(e));
    }
    out.normalize();
    return out;
}

TruncatedSeries TruncatedSeries::with_cap(int new_cap) const {
    TruncatedSeries out(dimension(), new_cap);
    for (const auto& [m, c] : terms())
        out.set_coefficient(m, c);  // silently drops degrees above new_cap
    return out;
}

Complex TruncatedSeries::evaluate(const std::vector<Complex>& point) const {
    if (int(point.size()) != dimension())
        throw Error(ErrorCode::dimension_mismatch, "evaluation point dimension differs");
    Complex sum(0.0, 0.0);
    for (const auto& [k, c] : terms_) {
        Complex v = c;
        for (int i = 0; i < dimension(); ++i) {
            int e = layout_->exponent_of(k, i);
            for (int j = 0; j < e; ++j) v *= point[std::size_t(i)];
        }
        sum += v;
    }
    return sum;
}

std::string TruncatedSeries::str() const {
    if (terms_.empty()) return "0";
    // ascending degree, z1-major inside a degree (descending key)
    std::vector<std::pair<PackedKey, Complex>> ordered(terms_);
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        const int dx = key_degree(x.first), dy = key_degree(y.first);
        if (dx != dy) return dx < dy;
        return y.first < x.first;
    });
    std::string out;
    for (const auto& [k, c] : ordered) {
        if (!out.empty()) out += " + ";
        out += coefficient_literal(c);
        const auto e = layout_->unpack(k);
        for (int i = 0; i < dimension(); ++i) {
            if (e[std::size_t(i)] == 0) continue;
            out += "*z" + std::to_string(i + 1);
            if (e[std::size_t(i)] > 1) out += "^" + std::to_string(e[std::size_t(i)]);
        }
    }
    return out;
}

TruncatedSeries TruncatedSeries::from_raw(std::shared_ptr<const detail::JetLayout> layout,
                                          std::vector<std::pair<PackedKey, Complex>> terms) {
    std::sort(terms.begin(), terms.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    TruncatedSeries out(layout->dimension(), layout->cap());
    out.terms_ = std::move(terms);
    out.normalize();
    return out;
}

TruncatedSeries operator+(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs += rhs; }
TruncatedSeries operator-(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs -= rhs; }
TruncatedSeries operator*(TruncatedSeries lhs, const TruncatedSeries& rhs) { return lhs *= rhs; }
TruncatedSeries operator*(TruncatedSeries lhs, Complex scalar) { return lhs *= scalar; }
TruncatedSeries operator*(Complex scalar, TruncatedSeries rhs) { return rhs *= scalar; }
TruncatedSeries operator/(TruncatedSeries lhs, const TruncatedSeries& rhs) {
    return lhs *= rhs.reciprocal();
}
TruncatedSeries operator/(TruncatedSeries lhs, Complex scalar) {
    return lhs *= Complex(1.0, 0.0) / scalar;
}

std::ostream& operator<<(std::ostream& os, const TruncatedSeries& s) { return os << s.str(); }

// --------------------------------------------------------------- GermComposer

struct GermComposer::Impl {
    std::vector<TruncatedSeries> target;
    std::shared_ptr<const JetLayout> layout;
    std::vector<PackedKey> unit_keys;
    std::unordered_map<PackedKey, TruncatedSeries, PackedKeyHash> powers;
};

GermComposer::GermComposer(std::vector<TruncatedSeries> target) : impl_(std::make_shared<Impl>()) {
    if (target.empty())
        throw Error(ErrorCode::invalid_argument, "composition target must not be empty");
    impl_->layout = target.front().layout();
    if (impl_->layout->dimension() != int(target.size()))
        throw Error(ErrorCode::dimension_mismatch,
                    "composition target must have one component per variable");
    for (const auto& comp : target) {
        if (comp.layout() != impl_->layout)
            throw Error(ErrorCode::dimension_mismatch,
                        "composition target components disagree in dimension or cap");
        if (!comp.is_zero() && comp.valuation() == 0)
            throw Error(ErrorCode::non_germ, "composition target must have zero constant terms");
    }
    impl_->target = std::move(target);
    const int n = impl_->layout->dimension();
    for (int i = 0; i < n; ++i) {
        std::vector<int> e(std::size_t(n), 0);
        e[std::size_t(i)] = 1;
        impl_->unit_keys.push_back(impl_->layout->pack(e));
    }
    impl_->powers.emplace(PackedKey{},
                          TruncatedSeries::constant(n, impl_->layout->cap(), Complex(1.0, 0.0)));
}

int GermComposer::dimension() const { return impl_->layout->dimension(); }
int GermComposer::cap() const { return impl_->layout->cap(); }

const TruncatedSeries& GermComposer::power(const MonomialIndex& m) {
    if (m.dimension() != dimension())
        throw Error(ErrorCode::dimension_mismatch, "monomial dimension differs from target");
    const PackedKey key = impl_->layout->pack(m.exponents());
    auto it = impl_->powers.find(key);
    if (it != impl_->powers.end()) return it->second;

    // Build by graded recursion: peel one variable at a time, memoizing every
    // intermediate power so later monomials reuse shared prefixes.
    std::vector<PackedKey> pending{key};
    while (!pending.empty()) {
        const PackedKey k = pending.back();
        if (impl_->powers.count(k)) {
            pending.pop_back();
            continue;
        }
        int var = -1;
        for (int i = 0; i < dimension(); ++i)
            if (impl_->layout->exponent_of(k, i) > 0) {
                var = i;
                break;
            }
        const PackedKey prev{k.hi - impl_->unit_keys[std::size_t(var)].hi,
                             k.lo - impl_->unit_keys[std::size_t(var)].lo};
        auto prev_it = impl_->powers.find(prev);
        if (prev_it == impl_->powers.end()) {
            pending.push_back(prev);
            continue;
        }
        impl_->powers.emplace(k, prev_it->second * impl_->target[std::size_t(var)]);
        pending.pop_back();
    }
    return impl_->powers.at(key);
}

TruncatedSeries GermComposer::compose(const TruncatedSeries& f) {
    if (f.layout() != impl_->layout)
        throw Error(ErrorCode::dimension_mismatch,
                    "composed series disagrees with target in dimension or cap");
    TruncatedSeries acc(dimension(), cap());
    // Materialize every needed power before touching the shared dense
    // scratch: building a power multiplies series, and multiplication uses
    // the same thread-local scratch this accumulation holds open.
    std::vector<const TruncatedSeries*> powers;
    powers.reserve(f.raw_terms().size());
    for (const auto& [k, c] : f.raw_terms())
        powers.push_back(&power(MonomialIndex(impl_->layout->unpack(k))));
    if (impl_->layout->has_ranks()) {
        auto& scratch = DenseScratch::local();
        scratch.ensure(impl_->layout->total_count());
        std::size_t term = 0;
        for (const auto& [k, c] : f.raw_terms()) {
            const TruncatedSeries& p = *powers[term++];
            for (const auto& [pk, pc] : p.raw_terms()) {
                const std::size_t r = impl_->layout->rank_of(pk);
                if (!scratch.used[r]) {
                    scratch.used[r] = 1;
                    scratch.value[r] = Complex(0.0, 0.0);
                    scratch.touched.push_back(std::uint32_t(r));
                }
                scratch.value[r] += c * pc;
            }
        }
        std::sort(scratch.touched.begin(), scratch.touched.end());
        std::vector<std::pair<PackedKey, Complex>> result;
        result.reserve(scratch.touched.size());
        const auto& keys = impl_->layout->keys();
        for (std::uint32_t r : scratch.touched) {
            result.emplace_back(keys[r], scratch.value[r]);
            scratch.used[r] = 0;
            scratch.value[r] = Complex(0.0, 0.0);
        }
        scratch.touched.clear();
        acc = TruncatedSeries::from_raw(impl_->layout, std::move(result));
    } else {
        std::size_t term = 0;
        for (const auto& [k, c] : f.raw_terms()) acc += *powers[term++] * c;
    }
    return acc;
}

TruncatedSeries compose(const TruncatedSeries& f, const std::vector<TruncatedSeries>& target) {
    GermComposer composer(target);
    return composer.compose(f);
}

// ---------------------------------------------------------------------- errors

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::syntax: return "syntax";
        case ErrorCode::non_germ: return "non_germ";
        case ErrorCode::singular_linear_part: return "singular_linear_part";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::capacity_exceeded: return "capacity_exceeded";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::not_contraction: return "not_contraction";
        case ErrorCode::no_convergence: return "no_convergence";
        case ErrorCode::resonant_input: return "resonant_input";
        case ErrorCode::resonance_obstruction: return "resonance_obstruction";
        case ErrorCode::not_flat: return "not_flat";
        case ErrorCode::not_closed: return "not_closed";
        case ErrorCode::rank_mismatch: return "rank_mismatch";
        case ErrorCode::singular_cocycle: return "singular_cocycle";
        case ErrorCode::dimension_too_small: return "dimension_too_small";
        case ErrorCode::not_diagonal: return "not_diagonal";
    }
    return "unknown";
}

}  // namespace hopf
