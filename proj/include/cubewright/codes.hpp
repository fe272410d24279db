#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <unordered_set>
#include <vector>

#include "cubewright/algebra.hpp"

namespace cubewright {

// Dense bitsets are used while the code space fits in 2^26 codes; beyond
// that membership falls back to a hash set.
constexpr std::uint64_t kDenseCodeCap = std::uint64_t{1} << 26;

inline Code encode_tuple(std::span<const Elem> tuple, int radix) {
    Code code = 0;
    for (Elem digit : tuple) code = code * static_cast<Code>(radix) + digit;
    return code;
}

inline void decode_tuple(Code code, int radix, std::span<Elem> out) {
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = static_cast<Elem>(code % radix);
        code /= radix;
    }
}

struct ElementCode {
    int k = 0;
    Code code = 0;
};

// A subset of A^k. Iteration is always in ascending code order; that
// ordering is what makes every downstream report reproducible.
class TupleSet {
public:
    TupleSet() = default;

    TupleSet(int radix, int k)
        : radix_(radix), k_(k),
          space_(checked_pow(static_cast<std::uint64_t>(radix), static_cast<std::uint64_t>(k))),
          dense_(space_ <= kDenseCodeCap) {
        if (dense_) bits_.assign((space_ + 63) / 64, 0);
    }

    int radix() const { return radix_; }
    int k() const { return k_; }
    std::uint64_t space() const { return space_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(Code c) const {
        if (dense_) return (bits_[c >> 6] >> (c & 63)) & 1;
        return sparse_.count(c) > 0;
    }

    // Returns true when the code was new.
    bool insert(Code c) {
        if (dense_) {
            std::uint64_t& word = bits_[c >> 6];
            std::uint64_t mask = std::uint64_t{1} << (c & 63);
            if (word & mask) return false;
            word |= mask;
        } else {
            if (!sparse_.insert(c).second) return false;
        }
        ++count_;
        sorted_dirty_ = true;
        return true;
    }

    // Ascending code order.
    const std::vector<Code>& codes() const {
        if (sorted_dirty_) {
            sorted_.clear();
            sorted_.reserve(count_);
            if (dense_) {
                for (std::uint64_t w = 0; w < bits_.size(); ++w) {
                    std::uint64_t word = bits_[w];
                    while (word) {
                        int bit = std::countr_zero(word);
                        sorted_.push_back((w << 6) | static_cast<std::uint64_t>(bit));
                        word &= word - 1;
                    }
                }
            } else {
                sorted_.assign(sparse_.begin(), sparse_.end());
                std::sort(sorted_.begin(), sorted_.end());
            }
            sorted_dirty_ = false;
        }
        return sorted_;
    }

    bool operator==(const TupleSet& other) const {
        return radix_ == other.radix_ && k_ == other.k_ && codes() == other.codes();
    }

private:
    int radix_ = 0;
    int k_ = 0;
    std::uint64_t space_ = 0;
    bool dense_ = false;
    std::vector<std::uint64_t> bits_;
    std::unordered_set<Code> sparse_;
    std::size_t count_ = 0;
    mutable std::vector<Code> sorted_;
    mutable bool sorted_dirty_ = false;
};

inline TupleSet tuple_set_of(int radix, int k, std::initializer_list<Code> cs) {
    TupleSet s(radix, k);
    for (Code c : cs) s.insert(c);
    return s;
}

} // namespace cubewright
