#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "hopf/series.hpp"

namespace hopf::detail {

struct PackedKeyHash {
    std::size_t operator()(const PackedKey& k) const {
        // splitmix-style mix of both words
        std::uint64_t x = k.hi * 0x9e3779b97f4a7c15ull ^ k.lo;
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        return std::size_t(x * 0x94d049bb133111ebull);
    }
};

// Immutable per-(dimension, cap) data: the packed-key field placement, the
// full graded-lex key enumeration with ranks (when the monomial count is
// small enough for dense scratch accumulation), and per-degree offsets.
class JetLayout {
public:
    static std::shared_ptr<const JetLayout> get(int dimension, int cap);

    int dimension() const { return n_; }
    int cap() const { return cap_; }

    PackedKey pack(const std::vector<int>& exponents) const;
    std::vector<int> unpack(const PackedKey& key) const;
    int exponent_of(const PackedKey& key, int var) const;

    // Dense-rank support. Available iff total_count() fits the scratch budget.
    bool has_ranks() const { return has_ranks_; }
    std::size_t total_count() const { return total_count_; }
    std::size_t rank_of(const PackedKey& key) const { return rank_.at(key); }
    const std::vector<PackedKey>& keys() const { return keys_; }

    // Monomial keys of one homogeneous degree, ascending (lex with z1 major).
    std::vector<PackedKey> degree_keys(int degree) const;
    static std::uint64_t monomial_count(int dimension, int degree);  // C(degree+n-1, n-1)

private:
    JetLayout(int dimension, int cap);

    int n_;
    int cap_;
    int bits_;
    std::vector<int> word_;   // 0 = hi, 1 = lo
    std::vector<int> shift_;

    bool has_ranks_ = false;
    std::size_t total_count_ = 0;
    std::vector<PackedKey> keys_;
    std::unordered_map<PackedKey, std::size_t, PackedKeyHash> rank_;
};

// Reusable accumulation scratch for dense multiply/compose paths; one per
// thread, grown on demand. Values and flags are zeroed again after each use.
struct DenseScratch {
    std::vector<Complex> value;
    std::vector<unsigned char> used;
    std::vector<std::uint32_t> touched;

    void ensure(std::size_t size) {
        if (value.size() < size) {
            value.resize(size, Complex(0.0, 0.0));
            used.resize(size, 0);
        }
    }
    static DenseScratch& local();
};

}  // namespace hopf::detail
