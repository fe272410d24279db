#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/closure.hpp"
#include "cubewright/term.hpp"

namespace cubewright {

// Closure of a family of fixed-width value vectors under the basic
// operations applied pointwise. This is the evaluation-vector sibling of
// SubpowerClosure: coordinates are arbitrary evaluation points rather than
// radix-coded power coordinates, so the width is unconstrained by the code
// space. Rounds, parent selection, and insertion order follow the same
// canonical rules (round-least derivation, new vectors sorted
// lexicographically within a round), so results are deterministic.
class VectorClosure {
public:
    struct Parent {
        std::int32_t op = -1;
        std::vector<std::uint32_t> args;
    };

    // When stop_target is given the rounds end as soon as that vector shows
    // up; absence is then only meaningful if the closure ran to completion
    // (see complete()).
    VectorClosure(const FiniteAlgebra& alg, int width, std::vector<std::vector<Elem>> generators,
                  ClosureLimits limits = {}, bool track_parents = false,
                  std::optional<std::vector<Elem>> stop_target = std::nullopt)
        : alg_(&alg), width_(width), limits_(limits), track_parents_(track_parents) {
        if (stop_target) stop_key_ = key_of(*stop_target);
        for (std::size_t g = 0; g < generators.size(); ++g) {
            if (static_cast<int>(generators[g].size()) != width_) {
                throw usage_error("vector closure: generator width mismatch");
            }
            generator_keys_.push_back(key_of(generators[g]));
            add_seed(generator_keys_.back(), static_cast<std::uint32_t>(g));
        }
        run();
    }

    // True when every round ran to a fixpoint (no early stop).
    bool complete() const { return complete_; }

    int width() const { return width_; }
    std::size_t size() const { return elements_.size(); }
    std::size_t generator_count() const { return generator_keys_.size(); }
    std::uint64_t applications() const { return applications_; }

    std::span<const Elem> vector(std::uint32_t idx) const {
        const std::string& s = elements_[idx];
        return std::span<const Elem>(reinterpret_cast<const Elem*>(s.data()), s.size());
    }

    std::optional<std::uint32_t> index_of(std::span<const Elem> v) const {
        auto it = index_.find(key_of(v));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::span<const Elem> v) const { return index_of(v).has_value(); }

    // Term over the generators, re-evaluated pointwise before returning.
    Term term_for(std::uint32_t idx) const {
        if (!track_parents_) throw inconsistency_error("vector closure built without parent records");
        std::unordered_map<std::uint32_t, Term> memo;
        Term t = rebuild(idx, memo);
        std::vector<Elem> assignment(generator_keys_.size());
        std::span<const Elem> want = vector(idx);
        for (int p = 0; p < width_; ++p) {
            for (std::size_t g = 0; g < generator_keys_.size(); ++g) {
                assignment[g] = static_cast<Elem>(static_cast<unsigned char>(generator_keys_[g][p]));
            }
            if (t.evaluate(*alg_, assignment) != want[p]) {
                throw inconsistency_error("vector closure: reconstructed term does not match its vector");
            }
        }
        return t;
    }

private:
    static std::string key_of(std::span<const Elem> v) {
        return std::string(reinterpret_cast<const char*>(v.data()), v.size());
    }
    static std::string key_of(const std::vector<Elem>& v) {
        return std::string(reinterpret_cast<const char*>(v.data()), v.size());
    }

    // Duplicate generators share one element; reconstruction refers to the
    // first generator index carrying the value.
    void add_seed(const std::string& key, std::uint32_t generator_index) {
        if (index_.count(key)) return;
        index_.emplace(key, static_cast<std::uint32_t>(elements_.size()));
        elements_.push_back(key);
        seed_origin_.push_back(generator_index);
        if (track_parents_) parents_.push_back(Parent{});
    }

    void run() {
        if (stop_key_ && index_.count(*stop_key_)) {
            complete_ = false;
            return;
        }
        std::size_t settled_end = 0;
        bool seeded_constants = false;
        std::vector<Elem> out(width_);
        while (settled_end < elements_.size() || !seeded_constants) {
            std::size_t frontier_begin = settled_end;
            std::size_t total = elements_.size();
            std::unordered_map<std::string, Parent> found;

            if (!seeded_constants) {
                seeded_constants = true;
                for (std::size_t oi = 0; oi < alg_->operations.size(); ++oi) {
                    const Operation& op = alg_->operations[oi];
                    if (op.arity != 0) continue;
                    std::string key(static_cast<std::size_t>(width_), static_cast<char>(op.table[0]));
                    if (!index_.count(key) && !found.count(key)) {
                        found.emplace(std::move(key), Parent{static_cast<std::int32_t>(oi), {}});
                    }
                }
            }

            for (std::size_t oi = 0; oi < alg_->operations.size(); ++oi) {
                const Operation& op = alg_->operations[oi];
                int r = op.arity;
                if (r == 0) continue;
                for (int p = 0; p < r; ++p) {
                    for (std::size_t f = frontier_begin; f < total; ++f) {
                        expand(op, static_cast<std::int32_t>(oi), p, f, frontier_begin, total, out, found);
                    }
                }
            }

            std::vector<std::string> fresh;
            fresh.reserve(found.size());
            for (const auto& [key, parent] : found) fresh.push_back(key);
            std::sort(fresh.begin(), fresh.end());
            settled_end = total;
            bool hit_target = false;
            for (std::string& key : fresh) {
                if (elements_.size() >= limits_.max_elements) {
                    throw resource_error("vector closure exceeded the element cap (" +
                                         std::to_string(limits_.max_elements) + " elements)");
                }
                if (stop_key_ && key == *stop_key_) hit_target = true;
                index_.emplace(key, static_cast<std::uint32_t>(elements_.size()));
                if (track_parents_) parents_.push_back(std::move(found[key]));
                elements_.push_back(std::move(key));
            }
            if (hit_target) {
                complete_ = false;
                break;
            }
            if (fresh.empty()) break;
        }
    }

    void expand(const Operation& op, std::int32_t oi, int pos, std::size_t frontier_idx,
                std::size_t frontier_begin, std::size_t total, std::vector<Elem>& out,
                std::unordered_map<std::string, Parent>& found) {
        int r = op.arity;
        std::vector<std::uint32_t> args(r, 0);
        args[pos] = static_cast<std::uint32_t>(frontier_idx);
        std::vector<int> free_slots;
        for (int p = 0; p < r; ++p) {
            if (p != pos) free_slots.push_back(p);
        }
        auto limit_for = [&](int p) -> std::size_t { return p < pos ? frontier_begin : total; };
        for (int p : free_slots) {
            if (limit_for(p) == 0) return;
        }
        std::vector<std::size_t> odo(free_slots.size(), 0);
        for (;;) {
            for (std::size_t i = 0; i < free_slots.size(); ++i) {
                args[free_slots[i]] = static_cast<std::uint32_t>(odo[i]);
            }
            if (++applications_ > limits_.max_applications) {
                throw resource_error("vector closure exceeded the application budget (" +
                                     std::to_string(limits_.max_applications) + " applications)");
            }
            const int size = alg_->size;
            for (int coord = 0; coord < width_; ++coord) {
                std::uint64_t idx = 0;
                for (std::uint32_t a : args) {
                    idx = idx * size + static_cast<Elem>(static_cast<unsigned char>(elements_[a][coord]));
                }
                out[coord] = op.table[idx];
            }
            std::string key = key_of(out);
            if (!index_.count(key)) {
                Parent cand{oi, args};
                auto it = found.find(key);
                if (it == found.end()) {
                    found.emplace(std::move(key), std::move(cand));
                } else if (cand.op < it->second.op ||
                           (cand.op == it->second.op && cand.args < it->second.args)) {
                    it->second = std::move(cand);
                }
            }
            std::size_t i = free_slots.size();
            for (;;) {
                if (i == 0) return;
                --i;
                if (++odo[i] < limit_for(free_slots[i])) break;
                odo[i] = 0;
            }
        }
    }

    Term rebuild(std::uint32_t idx, std::unordered_map<std::uint32_t, Term>& memo) const {
        auto it = memo.find(idx);
        if (it != memo.end()) return it->second;
        const Parent& p = parents_[idx];
        Term t;
        if (p.op < 0) {
            t = Term::variable(static_cast<int>(seed_origin_[idx]));
        } else {
            std::vector<Term> children;
            children.reserve(p.args.size());
            for (std::uint32_t a : p.args) children.push_back(rebuild(a, memo));
            t = Term::apply(alg_->operations[p.op].name, std::move(children));
        }
        memo.emplace(idx, t);
        return t;
    }

    const FiniteAlgebra* alg_;
    int width_;
    ClosureLimits limits_;
    bool track_parents_;
    std::unordered_map<std::string, std::uint32_t> index_;
    std::vector<std::string> elements_;
    std::vector<Parent> parents_;
    std::vector<std::uint32_t> seed_origin_;
    std::vector<std::string> generator_keys_;
    std::optional<std::string> stop_key_;
    bool complete_ = true;
    std::uint64_t applications_ = 0;
};

// All m-ary term operations of the algebra, materialized as value tables
// over the full assignment space A^m (closure of the m projections under the
// basic operations applied pointwise). The table of a term t at assignment
// index i is t(digits of i).
inline VectorClosure term_operations_at_arity(const FiniteAlgebra& alg, int m,
                                              ClosureLimits limits = {}, bool track_parents = false) {
    std::uint64_t points = checked_pow(static_cast<std::uint64_t>(alg.size), static_cast<std::uint64_t>(m));
    if (points > (std::uint64_t{1} << 24)) {
        throw resource_error("term-operation tables at arity " + std::to_string(m) + " need " +
                             std::to_string(points) + " entries each");
    }
    int width = static_cast<int>(points);
    std::vector<std::vector<Elem>> projections(m, std::vector<Elem>(width));
    std::vector<Elem> assignment(m);
    for (int i = 0; i < width; ++i) {
        decode_tuple(static_cast<Code>(i), alg.size, assignment);
        for (int v = 0; v < m; ++v) projections[v][i] = assignment[v];
    }
    return VectorClosure(alg, width, std::move(projections), limits, track_parents);
}

// Diagonal assignment indices for tables over A^m: positions of (a,...,a).
inline bool table_is_idempotent(std::span<const Elem> table, int size, int m) {
    for (int a = 0; a < size; ++a) {
        std::uint64_t idx = 0;
        for (int i = 0; i < m; ++i) idx = idx * size + a;
        if (table[idx] != a) return false;
    }
    return true;
}

// The level-m approximation of the idempotent reduct: an algebra on the same
// universe whose basic operations are exactly the idempotent m-ary term
// operations (lower arities are present through dummy variables). Returns
// the algebra together with the defining term of each materialized
// operation, so witnesses found against the approximation can be rewritten
// as terms of the original algebra.
struct LevelApproximation {
    FiniteAlgebra algebra;
    std::vector<Term> defining_terms;
};

inline LevelApproximation idempotent_level_approximation(const FiniteAlgebra& alg, int m,
                                                         ClosureLimits limits = {}) {
    VectorClosure clone = term_operations_at_arity(alg, m, limits, true);
    LevelApproximation out;
    out.algebra.name = alg.name.empty() ? "" : alg.name;
    out.algebra.size = alg.size;
    for (std::uint32_t i = 0; i < clone.size(); ++i) {
        std::span<const Elem> table = clone.vector(i);
        if (!table_is_idempotent(table, alg.size, m)) continue;
        Operation op;
        op.name = "t" + std::to_string(m) + "_" + std::to_string(out.algebra.operations.size());
        op.arity = m;
        op.table.assign(table.begin(), table.end());
        out.algebra.operations.push_back(std::move(op));
        out.defining_terms.push_back(clone.term_for(i));
    }
    return out;
}

} // namespace cubewright
