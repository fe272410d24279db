#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/codes.hpp"

namespace cubewright {

// An equivalence on {0..n-1} in canonical form: root_of[i] is the least
// element of i's block, blocks are listed by their least elements.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<int> root_of) : root_of_(std::move(root_of)) { normalize(); }

    static Partition identity(int n) {
        std::vector<int> r(n);
        for (int i = 0; i < n; ++i) r[i] = i;
        return Partition(std::move(r));
    }

    static Partition full(int n) { return Partition(std::vector<int>(n, 0)); }

    int size() const { return static_cast<int>(root_of_.size()); }
    int index() const { return static_cast<int>(blocks_.size()); }

    bool related(int a, int b) const { return root_of_[a] == root_of_[b]; }
    int root_of(int a) const { return root_of_[a]; }

    const std::vector<std::vector<int>>& blocks() const { return blocks_; }

    // Induced partition on the listed elements, renamed to their positions.
    Partition restrict_to(const std::vector<int>& subset) const {
        std::unordered_map<int, int> first_pos;
        std::vector<int> r(subset.size());
        for (std::size_t i = 0; i < subset.size(); ++i) {
            int root = root_of_[subset[i]];
            auto it = first_pos.find(root);
            if (it == first_pos.end()) {
                first_pos.emplace(root, static_cast<int>(i));
                r[i] = static_cast<int>(i);
            } else {
                r[i] = it->second;
            }
        }
        return Partition(std::move(r));
    }

    bool operator==(const Partition& other) const { return root_of_ == other.root_of_; }
    bool operator<(const Partition& other) const { return root_of_ < other.root_of_; }

    const std::vector<int>& canonical_key() const { return root_of_; }

private:
    void normalize() {
        // the raw vector may name blocks arbitrarily; rename each block to
        // its least member
        std::unordered_map<int, int> least;
        for (int i = 0; i < static_cast<int>(root_of_.size()); ++i) {
            auto it = least.find(root_of_[i]);
            if (it == least.end()) least.emplace(root_of_[i], i);
        }
        blocks_.clear();
        std::unordered_map<int, std::size_t> block_pos;
        for (int i = 0; i < static_cast<int>(root_of_.size()); ++i) {
            int root = least[root_of_[i]];
            root_of_[i] = root;
            auto it = block_pos.find(root);
            if (it == block_pos.end()) {
                block_pos.emplace(root, blocks_.size());
                blocks_.push_back({i});
            } else {
                blocks_[it->second].push_back(i);
            }
        }
        std::sort(blocks_.begin(), blocks_.end());
    }

    std::vector<int> root_of_;
    std::vector<std::vector<int>> blocks_;
};

// Blocks of size above the threshold, in canonical block order.
inline std::pair<int, std::vector<std::vector<int>>> block_profile(const Partition& p, int threshold) {
    std::vector<std::vector<int>> large;
    for (const auto& block : p.blocks()) {
        if (static_cast<int>(block.size()) > threshold) large.push_back(block);
    }
    return {static_cast<int>(large.size()), std::move(large)};
}

struct CarrierBudget {
    std::uint64_t max_verify_applications = 200'000'000;
    std::uint64_t max_table_entries = 16'000'000;
};

// A subpower materialized as an explicit element list: codes of tuples in
// A^k, with the basic operations acting coordinatewise and resolved back to
// element indices. Construction sorts the elements, verifies closedness
// exhaustively, and keeps full operation tables over element indices when
// they fit (the verification pass produces them anyway).
class CarrierAlgebra {
public:
    using Budget = CarrierBudget;

    CarrierAlgebra(const FiniteAlgebra& alg, int k, std::vector<Code> codes, Budget budget = Budget{})
        : alg_(&alg), k_(k), codes_(std::move(codes)) {
        std::sort(codes_.begin(), codes_.end());
        codes_.erase(std::unique(codes_.begin(), codes_.end()), codes_.end());
        digits_.resize(codes_.size() * static_cast<std::size_t>(k_));
        for (std::size_t i = 0; i < codes_.size(); ++i) {
            index_.emplace(codes_[i], static_cast<int>(i));
            decode_tuple(codes_[i], alg_->size, std::span<Elem>(digits_.data() + i * k_, k_));
        }
        verify_and_tabulate(budget);
    }

    const FiniteAlgebra& base() const { return *alg_; }
    int k() const { return k_; }
    int size() const { return static_cast<int>(codes_.size()); }
    Code code_of(int idx) const { return codes_[idx]; }
    const std::vector<Code>& codes() const { return codes_; }

    std::optional<int> index_of(Code c) const {
        auto it = index_.find(c);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<const Elem> digits(int idx) const {
        return std::span<const Elem>(digits_.data() + static_cast<std::size_t>(idx) * k_, k_);
    }

    int apply(int op_idx, std::span<const int> args) const {
        if (!tables_[op_idx].empty()) {
            std::size_t pos = 0;
            for (int a : args) pos = pos * codes_.size() + static_cast<std::size_t>(a);
            return tables_[op_idx][pos];
        }
        return apply_digitwise(op_idx, args);
    }

    // Evaluates a coordinatewise application and resolves the element index.
    int apply_digitwise(int op_idx, std::span<const int> args) const {
        const Operation& op = alg_->operations[op_idx];
        std::vector<Elem> out(k_);
        for (int coord = 0; coord < k_; ++coord) {
            std::uint64_t pos = 0;
            for (int a : args) {
                pos = pos * alg_->size + digits_[static_cast<std::size_t>(a) * k_ + coord];
            }
            out[coord] = op.table[pos];
        }
        auto idx = index_of(encode_tuple(out, alg_->size));
        if (!idx) {
            throw inconsistency_error("carrier is not closed under " + op.name);
        }
        return *idx;
    }

private:
    void verify_and_tabulate(const Budget& budget) {
        tables_.resize(alg_->operations.size());
        const std::uint64_t c = codes_.size();
        std::uint64_t work = 0;
        for (std::size_t oi = 0; oi < alg_->operations.size(); ++oi) {
            const Operation& op = alg_->operations[oi];
            std::uint64_t combos = 1;
            bool overflow = false;
            for (int i = 0; i < op.arity; ++i) {
                if (c != 0 && combos > budget.max_verify_applications / std::max<std::uint64_t>(c, 1)) {
                    overflow = true;
                    break;
                }
                combos *= c;
            }
            work += combos;
            if (overflow || work > budget.max_verify_applications) {
                throw resource_error("carrier closedness verification exceeds the application budget");
            }
            bool store = combos <= budget.max_table_entries;
            if (store) tables_[oi].reserve(combos);
            std::vector<int> args(op.arity, 0);
            if (c == 0) continue;
            for (;;) {
                int img = apply_digitwise(static_cast<int>(oi), args);
                if (store) tables_[oi].push_back(img);
                int p = op.arity;
                for (;;) {
                    if (p == 0) goto next_op;
                    --p;
                    if (++args[p] < static_cast<int>(c)) break;
                    args[p] = 0;
                }
            }
        next_op:;
            if (!store) tables_[oi].clear();
        }
    }

    const FiniteAlgebra* alg_;
    int k_;
    std::vector<Code> codes_;
    std::vector<Elem> digits_;
    std::unordered_map<Code, int> index_;
    std::vector<std::vector<int>> tables_;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) {
        for (int i = 0; i < n; ++i) parent_[i] = i;
    }

    explicit UnionFind(const Partition& p) : parent_(p.canonical_key()) {}

    int find(int a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    // Returns true when a merge happened.
    bool unite(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (ra > rb) std::swap(ra, rb);
        parent_[rb] = ra;
        return true;
    }

    Partition partition() {
        std::vector<int> roots(parent_.size());
        for (std::size_t i = 0; i < parent_.size(); ++i) roots[i] = find(static_cast<int>(i));
        return Partition(std::move(roots));
    }

private:
    std::vector<int> parent_;
};

// Congruence generation by unary translations. Whenever two elements merge,
// every polynomial f(c_1,..,x,..,c_r) with one free slot is pushed through
// the pair; unary translations generate the full compatibility closure
// (Mal'cev's congruence-generation lemma), so the fixpoint is the least
// congruence above the seed relation.
inline Partition close_congruence(const CarrierAlgebra& carrier, UnionFind uf,
                                  std::deque<std::pair<int, int>> queue) {
    const int c = carrier.size();
    while (!queue.empty()) {
        auto [u, v] = queue.front();
        queue.pop_front();
        for (std::size_t oi = 0; oi < carrier.base().operations.size(); ++oi) {
            const Operation& op = carrier.base().operations[oi];
            if (op.arity == 0) continue;
            std::vector<int> args(op.arity, 0);
            for (int pos = 0; pos < op.arity; ++pos) {
                // odometer over the other slots
                std::fill(args.begin(), args.end(), 0);
                for (;;) {
                    args[pos] = u;
                    int iu = carrier.apply(static_cast<int>(oi), args);
                    args[pos] = v;
                    int iv = carrier.apply(static_cast<int>(oi), args);
                    if (uf.unite(iu, iv)) queue.emplace_back(iu, iv);
                    int p = op.arity;
                    for (;;) {
                        if (p == 0) goto next_pos;
                        --p;
                        if (p == pos) continue;
                        if (++args[p] < c) break;
                        args[p] = 0;
                    }
                }
            next_pos:;
            }
        }
    }
    return uf.partition();
}

} // namespace detail

// Least congruence of the carrier containing the given pairs.
inline Partition generated_congruence(const CarrierAlgebra& carrier,
                                      const std::vector<std::pair<int, int>>& pairs) {
    detail::UnionFind uf(carrier.size());
    std::deque<std::pair<int, int>> queue;
    for (auto [a, b] : pairs) {
        if (a < 0 || b < 0 || a >= carrier.size() || b >= carrier.size()) {
            throw usage_error("generated_congruence: pair references a missing element");
        }
        if (uf.unite(a, b)) queue.emplace_back(a, b);
    }
    return detail::close_congruence(carrier, std::move(uf), std::move(queue));
}

// Partition of the carrier by equality of the z-th coordinate.
inline Partition kernel_of_projection(const CarrierAlgebra& carrier, int coordinate) {
    if (coordinate < 0 || coordinate >= carrier.k()) {
        throw usage_error("kernel_of_projection: coordinate out of range");
    }
    std::vector<int> first_with(256, -1);
    std::vector<int> roots(carrier.size());
    for (int i = 0; i < carrier.size(); ++i) {
        Elem value = carrier.digits(i)[coordinate];
        if (first_with[value] < 0) first_with[value] = i;
        roots[i] = first_with[value];
    }
    return Partition(std::move(roots));
}

// All congruences, as the join closure of the principal congruences. Join
// with a principal re-runs the translation fixpoint on top of an existing
// congruence, which is cheap because settled pairs never re-enter the queue.
inline std::vector<Partition> all_congruences(const CarrierAlgebra& carrier, int element_cap = 60,
                                              std::uint64_t count_cap = 2'000'000) {
    if (carrier.size() > element_cap) {
        throw resource_error("carrier has " + std::to_string(carrier.size()) +
                             " elements, above the congruence enumeration cap " +
                             std::to_string(element_cap));
    }
    const int c = carrier.size();
    struct KeyHash {
        std::size_t operator()(const std::vector<int>& v) const {
            std::size_t h = 1469598103934665603ull;
            for (int x : v) {
                h ^= static_cast<std::size_t>(x) + 0x9e3779b9;
                h *= 1099511628211ull;
            }
            return h;
        }
    };

    std::vector<std::pair<Partition, std::pair<int, int>>> principals;
    std::unordered_set<std::vector<int>, KeyHash> principal_keys;
    for (int a = 0; a < c; ++a) {
        for (int b = a + 1; b < c; ++b) {
            Partition p = generated_congruence(carrier, {{a, b}});
            if (principal_keys.insert(p.canonical_key()).second) {
                principals.emplace_back(std::move(p), std::make_pair(a, b));
            }
        }
    }

    std::unordered_set<std::vector<int>, KeyHash> seen;
    std::vector<Partition> out;
    std::deque<Partition> queue;
    Partition identity = Partition::identity(c);
    seen.insert(identity.canonical_key());
    out.push_back(identity);
    queue.push_back(std::move(identity));
    while (!queue.empty()) {
        Partition theta = std::move(queue.front());
        queue.pop_front();
        for (const auto& [principal, pair] : principals) {
            if (theta.related(pair.first, pair.second)) continue;
            detail::UnionFind uf(theta);
            std::deque<std::pair<int, int>> merge_queue;
            uf.unite(pair.first, pair.second);
            merge_queue.emplace_back(pair.first, pair.second);
            Partition join = detail::close_congruence(carrier, std::move(uf), std::move(merge_queue));
            if (seen.insert(join.canonical_key()).second) {
                if (out.size() >= count_cap) {
                    throw resource_error("congruence enumeration exceeded the count cap");
                }
                out.push_back(join);
                queue.push_back(std::move(join));
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cubewright
