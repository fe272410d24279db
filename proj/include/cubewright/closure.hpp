#pragma once

#include <atomic>
#include <cstdint>
#include <numeric>
#include <optional>
#include <thread>
#include <unordered_map>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/codes.hpp"
#include "cubewright/term.hpp"

namespace cubewright {

struct ClosureLimits {
    std::uint64_t max_elements = 1'000'000;
    std::uint64_t max_applications = 200'000'000;
    int threads = 1;
};

// Subpower closure in A^k. Worklist-driven: each round applies every basic
// operation to argument tuples containing at least one frontier element, so
// settled combinations are never re-derived. The derivation recorded for a
// new element is the least one (operation index, then argument indices
// lexicographically) among the round that produced it; together with the
// round structure this makes elements, order, and parents independent of the
// thread count.
class SubpowerClosure {
public:
    struct Parent {
        std::int32_t op = -1;                 // -1 marks a generator
        std::vector<std::uint32_t> args;      // element indices
    };

    SubpowerClosure(const FiniteAlgebra& alg, int k, std::vector<Code> generators,
                    ClosureLimits limits = {}, bool track_parents = false)
        : alg_(&alg), k_(k), limits_(limits), track_parents_(track_parents),
          space_(checked_pow(static_cast<std::uint64_t>(alg.size), static_cast<std::uint64_t>(k))),
          membership_(alg.size, k), generator_codes_(std::move(generators)) {
        for (std::size_t g = 0; g < generator_codes_.size(); ++g) {
            add_seed(generator_codes_[g], static_cast<std::uint32_t>(g));
        }
        run();
    }

    int k() const { return k_; }
    std::size_t size() const { return codes_.size(); }
    std::size_t generator_count() const { return generator_codes_.size(); }
    std::uint64_t applications() const { return applications_; }
    const std::vector<Code>& codes_in_insertion_order() const { return codes_; }

    bool contains(Code c) const { return membership_.contains(c); }

    std::optional<std::uint32_t> index_of(Code c) const {
        auto it = index_.find(c);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::span<const Elem> digits(std::uint32_t idx) const {
        return std::span<const Elem>(digits_.data() + std::size_t(idx) * k_, k_);
    }

    TupleSet tuple_set() const {
        TupleSet out(alg_->size, k_);
        for (Code c : codes_) out.insert(c);
        return out;
    }

    // Term over the generators (as variables, in the order they were given)
    // that evaluates coordinatewise to the target. The result is re-evaluated
    // against the target before being returned.
    Term term_for(Code target) const {
        if (!track_parents_) throw inconsistency_error("closure was built without parent records");
        auto idx = index_of(target);
        if (!idx) throw usage_error("term_for: target is not in the closure");
        std::unordered_map<std::uint32_t, Term> memo;
        Term t = rebuild(*idx, memo);
        std::vector<Elem> gen_digits(generator_codes_.size() * k_);
        for (std::size_t g = 0; g < generator_codes_.size(); ++g) {
            decode_tuple(generator_codes_[g], alg_->size,
                         std::span<Elem>(gen_digits.data() + g * k_, k_));
        }
        std::vector<Elem> buf(k_);
        std::vector<Elem> assignment(generator_codes_.size());
        for (int coord = 0; coord < k_; ++coord) {
            for (std::size_t g = 0; g < generator_codes_.size(); ++g) {
                assignment[g] = gen_digits[g * k_ + coord];
            }
            buf[coord] = t.evaluate(*alg_, assignment);
        }
        if (encode_tuple(buf, alg_->size) != target) {
            throw inconsistency_error("term_for: reconstructed term does not evaluate to its target");
        }
        return t;
    }

private:
    // Duplicate generators share one element; reconstruction refers to the
    // first generator index carrying the value.
    void add_seed(Code c, std::uint32_t generator_index) {
        if (membership_.contains(c)) return;
        membership_.insert(c);
        index_.emplace(c, static_cast<std::uint32_t>(codes_.size()));
        codes_.push_back(c);
        std::size_t off = digits_.size();
        digits_.resize(off + k_);
        decode_tuple(c, alg_->size, std::span<Elem>(digits_.data() + off, k_));
        seed_origin_.push_back(generator_index);
        if (track_parents_) parents_.push_back(Parent{});
    }

    struct Candidate {
        Parent parent;
        bool better(const Parent& other) const {
            if (parent.op != other.op) return parent.op < other.op;
            return parent.args < other.args;
        }
    };

    void run() {
        std::size_t settled_end = 0;
        bool seeded_constants = false;
        while (settled_end < codes_.size() || !seeded_constants) {
            std::size_t frontier_begin = settled_end;
            std::size_t total = codes_.size();
            std::unordered_map<Code, Parent> found;

            // constants enter once, in the first round
            if (!seeded_constants) {
                seeded_constants = true;
                for (std::size_t oi = 0; oi < alg_->operations.size(); ++oi) {
                    const Operation& op = alg_->operations[oi];
                    if (op.arity != 0) continue;
                    std::vector<Elem> tup(k_, op.table[0]);
                    Code c = encode_tuple(tup, alg_->size);
                    if (!membership_.contains(c) && !found.count(c)) {
                        found.emplace(c, Parent{static_cast<std::int32_t>(oi), {}});
                    }
                }
            }

            if (total > frontier_begin || !found.empty()) {
                expand_round(frontier_begin, total, found);
            }

            // canonical insertion order: ascending code within the round
            std::vector<Code> fresh;
            fresh.reserve(found.size());
            for (const auto& [c, p] : found) fresh.push_back(c);
            std::sort(fresh.begin(), fresh.end());
            settled_end = total;
            for (Code c : fresh) {
                if (codes_.size() >= limits_.max_elements) {
                    throw resource_error("closure exceeded the element cap (" +
                                         std::to_string(limits_.max_elements) + " elements)");
                }
                membership_.insert(c);
                index_.emplace(c, static_cast<std::uint32_t>(codes_.size()));
                codes_.push_back(c);
                std::size_t off = digits_.size();
                digits_.resize(off + k_);
                decode_tuple(c, alg_->size, std::span<Elem>(digits_.data() + off, k_));
                if (track_parents_) parents_.push_back(std::move(found[c]));
            }
            if (fresh.empty()) break;
        }
    }

    // One frontier round. Tuples with at least one frontier member are
    // partitioned by the first frontier position: slots before it draw from
    // settled elements only, the slot itself from the frontier, later slots
    // from everything.
    void expand_round(std::size_t frontier_begin, std::size_t total,
                      std::unordered_map<Code, Parent>& found) {
        struct Task {
            std::uint32_t op;
            std::uint32_t pos;
            std::uint32_t frontier_idx;
        };
        std::vector<Task> tasks;
        for (std::size_t oi = 0; oi < alg_->operations.size(); ++oi) {
            int r = alg_->operations[oi].arity;
            if (r == 0) continue;
            for (int p = 0; p < r; ++p) {
                for (std::size_t f = frontier_begin; f < total; ++f) {
                    tasks.push_back(Task{static_cast<std::uint32_t>(oi), static_cast<std::uint32_t>(p),
                                         static_cast<std::uint32_t>(f)});
                }
            }
        }
        if (tasks.empty()) return;

        int threads = std::max(1, limits_.threads);
        std::atomic<std::size_t> next_task{0};
        std::atomic<std::uint64_t> apps{applications_};
        std::atomic<bool> over_budget{false};

        auto worker = [&](std::unordered_map<Code, Parent>& local) {
            std::vector<std::uint32_t> args;
            std::vector<Elem> out(k_);
            std::uint64_t local_apps = 0;
            for (;;) {
                std::size_t ti = next_task.fetch_add(1);
                if (ti >= tasks.size() || over_budget.load(std::memory_order_relaxed)) break;
                const Task& task = tasks[ti];
                const Operation& op = alg_->operations[task.op];
                int r = op.arity;
                args.assign(r, 0);
                args[task.pos] = task.frontier_idx;
                // odometer over the remaining positions
                auto limit_for = [&](int pos) -> std::size_t {
                    if (pos < static_cast<int>(task.pos)) return frontier_begin;
                    return total;
                };
                std::vector<int> free_slots;
                for (int p = 0; p < r; ++p) {
                    if (p != static_cast<int>(task.pos)) free_slots.push_back(p);
                }
                bool degenerate = false;
                for (int p : free_slots) {
                    if (limit_for(p) == 0) degenerate = true;
                }
                if (degenerate) continue;
                std::vector<std::size_t> odo(free_slots.size(), 0);
                for (;;) {
                    for (std::size_t i = 0; i < free_slots.size(); ++i) {
                        args[free_slots[i]] = static_cast<std::uint32_t>(odo[i]);
                    }
                    apply_into(op, args, out);
                    ++local_apps;
                    if ((local_apps & 0xfff) == 0) {
                        if (apps.load(std::memory_order_relaxed) + local_apps > limits_.max_applications) {
                            over_budget.store(true, std::memory_order_relaxed);
                            break;
                        }
                    }
                    Code c = encode_tuple(out, alg_->size);
                    if (!membership_.contains(c)) {
                        Parent cand{static_cast<std::int32_t>(task.op),
                                    std::vector<std::uint32_t>(args.begin(), args.end())};
                        auto it = local.find(c);
                        if (it == local.end()) {
                            local.emplace(c, std::move(cand));
                        } else if (Candidate{cand}.better(it->second)) {
                            it->second = std::move(cand);
                        }
                    }
                    // advance odometer
                    std::size_t i = free_slots.size();
                    for (;;) {
                        if (i == 0) goto task_done;
                        --i;
                        if (++odo[i] < limit_for(free_slots[i])) break;
                        odo[i] = 0;
                    }
                }
            task_done:;
                if (over_budget.load(std::memory_order_relaxed)) break;
            }
            apps.fetch_add(local_apps);
        };

        std::vector<std::unordered_map<Code, Parent>> locals(threads);
        if (threads == 1) {
            worker(locals[0]);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker, std::ref(locals[t]));
            for (auto& th : pool) th.join();
        }
        applications_ = apps.load();
        if (over_budget.load() || applications_ > limits_.max_applications) {
            throw resource_error("closure exceeded the application budget (" +
                                 std::to_string(limits_.max_applications) + " applications)");
        }
        for (auto& local : locals) {
            for (auto& [c, p] : local) {
                auto it = found.find(c);
                if (it == found.end()) {
                    found.emplace(c, std::move(p));
                } else if (Candidate{p}.better(it->second)) {
                    it->second = std::move(p);
                }
            }
        }
    }

    void apply_into(const Operation& op, const std::vector<std::uint32_t>& args, std::vector<Elem>& out) const {
        const int size = alg_->size;
        for (int coord = 0; coord < k_; ++coord) {
            std::uint64_t idx = 0;
            for (std::uint32_t a : args) {
                idx = idx * size + digits_.data()[std::size_t(a) * k_ + coord];
            }
            out[coord] = op.table[idx];
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
    int k_;
    ClosureLimits limits_;
    bool track_parents_;
    std::uint64_t space_;
    TupleSet membership_;
    std::unordered_map<Code, std::uint32_t> index_;
    std::vector<Code> codes_;
    std::vector<Elem> digits_;
    std::vector<Parent> parents_;
    std::vector<std::uint32_t> seed_origin_;
    std::vector<Code> generator_codes_;
    std::uint64_t applications_ = 0;
};

inline TupleSet sg_power(const FiniteAlgebra& alg, int k, const TupleSet& generators,
                         ClosureLimits limits = {}) {
    SubpowerClosure closure(alg, k, generators.codes(), limits, false);
    return closure.tuple_set();
}

// Closure of a set in A^k under every idempotent term operation of the
// algebra. Implemented by the diagonal-tag construction: each generator g is
// extended to (g, 0, 1, ..., size-1) and the plain closure is taken in
// A^(k+size); an element produced by a term t carries the tag
// (t(a,...,a))_{a in A}, which equals the identity tag exactly when t is
// idempotent. When every basic operation is already idempotent the tag never
// moves and the construction reduces to sg_power.
class IdempotentClosure {
public:
    IdempotentClosure(const FiniteAlgebra& alg, int k, std::vector<Code> generators,
                      ClosureLimits limits = {}, bool track_parents = false)
        : alg_(&alg), k_(k), tagged_(!all_operations_idempotent(alg)) {
        if (!tagged_) {
            closure_.emplace(alg, k, std::move(generators), limits, track_parents);
            return;
        }
        std::vector<Code> tagged_gens;
        tagged_gens.reserve(generators.size());
        std::vector<Elem> buf(k_ + alg.size);
        for (Code g : generators) {
            decode_tuple(g, alg.size, std::span<Elem>(buf.data(), k_));
            for (int a = 0; a < alg.size; ++a) buf[k_ + a] = static_cast<Elem>(a);
            tagged_gens.push_back(encode_tuple(buf, alg.size));
        }
        closure_.emplace(alg, k_ + alg.size, std::move(tagged_gens), limits, track_parents);
    }

    bool contains(Code c) const { return closure_->contains(to_inner(c)); }

    Term term_for(Code c) const { return closure_->term_for(to_inner(c)); }

    // The k-prefixes of tagged closure elements whose tag is the identity.
    TupleSet prefix_set() const {
        TupleSet out(alg_->size, k_);
        if (!tagged_) {
            for (Code c : closure_->codes_in_insertion_order()) out.insert(c);
            return out;
        }
        const int n = alg_->size;
        for (std::size_t i = 0; i < closure_->size(); ++i) {
            std::span<const Elem> d = closure_->digits(static_cast<std::uint32_t>(i));
            bool identity_tag = true;
            for (int a = 0; a < n; ++a) {
                if (d[k_ + a] != a) {
                    identity_tag = false;
                    break;
                }
            }
            if (identity_tag) out.insert(encode_tuple(d.subspan(0, k_), n));
        }
        return out;
    }

    std::uint64_t applications() const { return closure_->applications(); }

private:
    Code to_inner(Code c) const {
        if (!tagged_) return c;
        std::vector<Elem> buf(k_ + alg_->size);
        decode_tuple(c, alg_->size, std::span<Elem>(buf.data(), k_));
        for (int a = 0; a < alg_->size; ++a) buf[k_ + a] = static_cast<Elem>(a);
        return encode_tuple(buf, alg_->size);
    }

    const FiniteAlgebra* alg_;
    int k_;
    bool tagged_;
    std::optional<SubpowerClosure> closure_;
};

inline TupleSet idempotent_image_closure(const FiniteAlgebra& alg, int k, const TupleSet& generators,
                                         ClosureLimits limits = {}) {
    IdempotentClosure closure(alg, k, generators.codes(), limits, false);
    return closure.prefix_set();
}

// S is a subuniverse of the idempotent reduct exactly when it is fixed by
// the idempotent-term closure at exponent 1. Closing the listed elements
// suffices: identifying variables of an idempotent term keeps it idempotent,
// so unary images of S under the idempotent clone are covered.
inline bool is_idempotent_subuniverse(const FiniteAlgebra& alg, const std::vector<Elem>& subset,
                                      ClosureLimits limits = {}) {
    if (subset.empty()) throw usage_error("is_idempotent_subuniverse: empty subset");
    TupleSet gens(alg.size, 1);
    for (Elem e : subset) gens.insert(e);
    TupleSet closed = idempotent_image_closure(alg, 1, gens, limits);
    return closed == gens;
}

// All nonempty subsets of the universe closed under the idempotent clone,
// ascending by size then by bitmask.
inline std::vector<std::vector<Elem>> enumerate_idempotent_subuniverses(const FiniteAlgebra& alg,
                                                                        int universe_bound = 8,
                                                                        ClosureLimits limits = {}) {
    if (alg.size > universe_bound) {
        throw resource_error("universe size " + std::to_string(alg.size) +
                             " exceeds the subuniverse enumeration bound " + std::to_string(universe_bound));
    }
    std::vector<std::vector<Elem>> result;
    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 1; mask < (1u << alg.size); ++mask) masks.push_back(mask);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        return a < b;
    });
    for (std::uint32_t mask : masks) {
        std::vector<Elem> subset;
        for (int e = 0; e < alg.size; ++e) {
            if (mask & (1u << e)) subset.push_back(static_cast<Elem>(e));
        }
        if (is_idempotent_subuniverse(alg, subset, limits)) result.push_back(std::move(subset));
    }
    return result;
}

} // namespace cubewright
