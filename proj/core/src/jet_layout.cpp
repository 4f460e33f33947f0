#include "jet_layout.hpp"

#include <bit>
#include <map>
#include <mutex>

#include "hopf/errors.hpp"

namespace hopf::detail {

namespace {

// Largest monomial table we are willing to enumerate for dense ranks.
constexpr std::size_t kRankLimit = 1u << 21;

std::uint64_t saturating_binomial(std::uint64_t top, std::uint64_t k, std::uint64_t limit) {
    // C(top, k) capped at `limit` to avoid overflow on silly parameters.
    if (k > top) return 0;
    k = std::min(k, top - k);
    std::uint64_t result = 1;
    for (std::uint64_t j = 1; j <= k; ++j) {
        if (result > limit) return limit + 1;
        result = result * (top - k + j) / j;
    }
    return result;
}

}  // namespace

std::uint64_t JetLayout::monomial_count(int dimension, int degree) {
    if (degree < 0) return 0;
    return saturating_binomial(std::uint64_t(degree + dimension - 1),
                               std::uint64_t(dimension - 1), ~0ull >> 2);
}

JetLayout::JetLayout(int dimension, int cap) : n_(dimension), cap_(cap) {
    if (n_ < 1) throw Error(ErrorCode::invalid_argument, "series dimension must be at least 1");
    if (cap_ < 0) throw Error(ErrorCode::invalid_argument, "truncation cap must be non-negative");
    if (cap_ > 255)
        throw Error(ErrorCode::capacity_exceeded, "truncation cap above 255 is not supported");

    bits_ = std::max(1, int(std::bit_width(unsigned(cap_))));
    const int hi_slots = std::min(n_, 56 / bits_);
    const int lo_slots = n_ - hi_slots;
    if (lo_slots * bits_ > 64)
        throw Error(ErrorCode::capacity_exceeded,
                    "dimension " + std::to_string(n_) + " at cap " + std::to_string(cap_) +
                        " exceeds the packed exponent budget");

    word_.resize(std::size_t(n_));
    shift_.resize(std::size_t(n_));
    for (int i = 0; i < n_; ++i) {
        if (i < hi_slots) {
            word_[std::size_t(i)] = 0;
            shift_[std::size_t(i)] = 56 - bits_ * (i + 1);
        } else {
            word_[std::size_t(i)] = 1;
            shift_[std::size_t(i)] = 64 - bits_ * (i - hi_slots + 1);
        }
    }

    const std::uint64_t total = saturating_binomial(std::uint64_t(cap_ + n_), std::uint64_t(n_),
                                                    std::uint64_t(kRankLimit) + 1);
    if (total <= kRankLimit) {
        has_ranks_ = true;
        total_count_ = std::size_t(total);
        keys_.reserve(total_count_);
        std::vector<int> e(std::size_t(n_), 0);
        // Ascending degree; within a degree, recursive enumeration with the
        // z1 exponent ascending outermost — exactly ascending packed keys.
        for (int d = 0; d <= cap_; ++d) {
            auto emit = [&](auto&& self, int var, int remaining) -> void {
                if (var == n_ - 1) {
                    e[std::size_t(var)] = remaining;
                    keys_.push_back(pack(e));
                    return;
                }
                for (int t = 0; t <= remaining; ++t) {
                    e[std::size_t(var)] = t;
                    self(self, var + 1, remaining - t);
                }
            };
            emit(emit, 0, d);
        }
        rank_.reserve(keys_.size() * 2);
        for (std::size_t r = 0; r < keys_.size(); ++r) rank_.emplace(keys_[r], r);
    }
}

std::shared_ptr<const JetLayout> JetLayout::get(int dimension, int cap) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> registry;
    std::lock_guard<std::mutex> lock(mutex);
    auto key = std::make_pair(dimension, cap);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
    auto layout = std::shared_ptr<const JetLayout>(new JetLayout(dimension, cap));
    registry.emplace(key, layout);
    return layout;
}

PackedKey JetLayout::pack(const std::vector<int>& exponents) const {
    PackedKey key;
    int degree = 0;
    for (int i = 0; i < n_; ++i) {
        const int e = exponents[std::size_t(i)];
        degree += e;
        const std::uint64_t field = std::uint64_t(e) << shift_[std::size_t(i)];
        if (word_[std::size_t(i)] == 0)
            key.hi |= field;
        else
            key.lo |= field;
    }
    key.hi |= std::uint64_t(degree) << 56;
    return key;
}

std::vector<int> JetLayout::unpack(const PackedKey& key) const {
    std::vector<int> e(std::size_t(n_), 0);
    for (int i = 0; i < n_; ++i) e[std::size_t(i)] = exponent_of(key, i);
    return e;
}

int JetLayout::exponent_of(const PackedKey& key, int var) const {
    const std::uint64_t word = word_[std::size_t(var)] == 0 ? key.hi : key.lo;
    const std::uint64_t mask = (std::uint64_t(1) << bits_) - 1;
    return int((word >> shift_[std::size_t(var)]) & mask);
}

std::vector<PackedKey> JetLayout::degree_keys(int degree) const {
    std::vector<PackedKey> out;
    if (degree < 0 || degree > cap_) return out;
    out.reserve(std::size_t(monomial_count(n_, degree)));
    std::vector<int> e(std::size_t(n_), 0);
    auto emit = [&](auto&& self, int var, int remaining) -> void {
        if (var == n_ - 1) {
            e[std::size_t(var)] = remaining;
            out.push_back(pack(e));
            return;
        }
        for (int t = 0; t <= remaining; ++t) {
            e[std::size_t(var)] = t;
            self(self, var + 1, remaining - t);
        }
    };
    emit(emit, 0, degree);
    return out;
}

DenseScratch& DenseScratch::local() {
    thread_local DenseScratch scratch;
    return scratch;
}

}  // namespace hopf::detail
