#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/closure.hpp"
#include "cubewright/term.hpp"
#include "cubewright/vector_closure.hpp"

namespace cubewright {

// A pair of subuniverses D < B such that every term operation has a
// coordinate pulling mixed B-arguments with a D-entry back into D. The
// absorbing map records, per basic operation of the algebra the pair was
// certified against, the least such coordinate.
struct BlockerPair {
    std::vector<Elem> d;
    std::vector<Elem> b;
    std::map<std::string, int> absorbing;
};

// Which rows of the identity scheme ask for y in which variable. Column j
// is a nonempty subset of rows, encoded with row r on bit r-1.
struct CubePattern {
    int dimension = 0;
    std::vector<std::uint32_t> columns;

    CubePattern(int d, std::vector<std::uint32_t> cols) : dimension(d), columns(std::move(cols)) {
        if (d < 1 || d > 20) throw usage_error("cube pattern dimension out of range");
        std::uint32_t covered = 0;
        for (std::uint32_t c : columns) {
            if (c == 0 || c >= (1u << d)) throw usage_error("cube pattern column out of range");
            covered |= c;
        }
        if (covered != (1u << d) - 1) throw usage_error("cube pattern leaves a row uncovered");
    }

    static CubePattern near_unanimity(int d) {
        std::vector<std::uint32_t> cols;
        for (int r = 0; r < d; ++r) cols.push_back(1u << r);
        return CubePattern(d, std::move(cols));
    }

    static CubePattern full_cube(int d) {
        std::vector<std::uint32_t> cols;
        for (std::uint32_t c = 1; c < (1u << d); ++c) cols.push_back(c);
        return CubePattern(d, std::move(cols));
    }

    std::string describe() const {
        std::string s = "d=" + std::to_string(dimension) + " columns=[";
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) s += ",";
            s += "(";
            for (int r = 0; r < dimension; ++r) {
                if (r) s += ",";
                s += ((columns[j] >> r) & 1) ? "1" : "0";
            }
            s += ")";
        }
        return s + "]";
    }
};

enum class CubeStatus {
    HasCubeTerm,
    BlockerCertified,
    BlockerCandidate,
    BudgetExhausted,
};

inline const char* to_string(CubeStatus s) {
    switch (s) {
        case CubeStatus::HasCubeTerm: return "HasCubeTerm";
        case CubeStatus::BlockerCertified: return "BlockerCertified";
        case CubeStatus::BlockerCandidate: return "BlockerCandidate";
        case CubeStatus::BudgetExhausted: return "BudgetExhausted";
    }
    return "?";
}

// HasCubeTerm and BlockerCertified are proofs; BlockerCandidate and
// BudgetExhausted are not. BlockerCertified only arises when the algebra
// handed in had all-idempotent basic operations.
struct CubeAnalysis {
    CubeStatus status = CubeStatus::BudgetExhausted;
    std::optional<BlockerPair> blocker;
    std::optional<std::pair<CubePattern, Term>> witness;
    int level_reached = 0;
    int cross_depth_reached = 0;
    std::string note;
};

struct CubeOptions {
    int m_max = 3;
    int k_max = 4;
    int d_max = 3;
    int universe_bound = 8;
    ClosureLimits limits;
};

namespace detail {

inline std::vector<Elem> mask_to_set(std::uint32_t mask, int size) {
    std::vector<Elem> out;
    for (int e = 0; e < size; ++e) {
        if (mask & (1u << e)) out.push_back(static_cast<Elem>(e));
    }
    return out;
}

inline std::uint32_t set_to_mask(const std::vector<Elem>& set) {
    std::uint32_t mask = 0;
    for (Elem e : set) mask |= 1u << e;
    return mask;
}

// Subuniverses of an algebra whose basic operations are all idempotent,
// ascending by size then mask.
inline std::vector<std::uint32_t> subuniverse_masks(const FiniteAlgebra& alg) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t mask = 1; mask < (1u << alg.size); ++mask) out.push_back(mask);
    std::sort(out.begin(), out.end(), [](std::uint32_t a, std::uint32_t b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        return a < b;
    });
    std::vector<std::uint32_t> keep;
    for (std::uint32_t mask : out) {
        TupleSet gens(alg.size, 1);
        for (int e = 0; e < alg.size; ++e) {
            if (mask & (1u << e)) gens.insert(static_cast<Code>(e));
        }
        if (sg_power(alg, 1, gens) == gens) keep.push_back(mask);
    }
    return keep;
}

// Least coordinate of f absorbing (B, D), or -1. Coordinate i absorbs when
// f lands in D whenever the i-th argument is in D and all arguments are in B.
inline int absorbing_coordinate(const FiniteAlgebra& alg, const Operation& op,
                                const std::vector<Elem>& b_set, const std::vector<Elem>& d_set) {
    if (op.arity == 0) return -1;
    std::uint32_t d_mask = set_to_mask(d_set);
    for (int i = 0; i < op.arity; ++i) {
        bool absorbs = true;
        std::vector<std::size_t> odo(op.arity, 0);
        std::vector<Elem> args(op.arity);
        for (;;) {
            bool in_scope = true;
            for (int p = 0; p < op.arity; ++p) {
                args[p] = (p == i) ? d_set[odo[p]] : b_set[odo[p]];
            }
            (void)in_scope;
            if (!(d_mask & (1u << alg.apply(op, args)))) {
                absorbs = false;
                break;
            }
            int p = op.arity;
            for (;;) {
                if (p == 0) goto scanned;
                --p;
                std::size_t limit = (p == i) ? d_set.size() : b_set.size();
                if (++odo[p] < limit) break;
                odo[p] = 0;
            }
        }
    scanned:
        if (absorbs) return i;
    }
    return -1;
}

} // namespace detail

// True when each recorded absorbing coordinate checks out against the
// operation tables; used to re-verify certificates loaded from reports.
inline bool verify_blocker(const FiniteAlgebra& alg, const BlockerPair& pair) {
    if (pair.d.empty() || pair.d.size() >= pair.b.size()) return false;
    std::uint32_t bm = detail::set_to_mask(pair.b);
    std::uint32_t dm = detail::set_to_mask(pair.d);
    if ((bm & dm) != dm) return false;
    for (const Operation& op : alg.operations) {
        auto it = pair.absorbing.find(op.name);
        if (it == pair.absorbing.end()) return false;
        int i = detail::absorbing_coordinate(alg, op, pair.b, pair.d);
        if (i < 0) return false;
        int recorded = it->second;
        if (recorded < 0 || recorded >= std::max(op.arity, 1)) return false;
        // the recorded coordinate itself must absorb, not merely some coordinate
        std::vector<Elem> args(op.arity);
        std::vector<std::size_t> odo(op.arity, 0);
        if (op.arity == 0) return false;
        for (;;) {
            for (int p = 0; p < op.arity; ++p) {
                args[p] = (p == recorded) ? pair.d[odo[p]] : pair.b[odo[p]];
            }
            if (!(dm & (1u << alg.apply(op, args)))) return false;
            int p = op.arity;
            for (;;) {
                if (p == 0) goto next_op;
                --p;
                std::size_t limit = (p == recorded) ? pair.d.size() : pair.b.size();
                if (++odo[p] < limit) break;
                odo[p] = 0;
            }
        }
    next_op:;
    }
    return true;
}

// Exhaustive cube-term-blocker search for an algebra presented by idempotent
// basic operations. Pairs run over subuniverses D < B with D contained in B;
// a pair is kept when every basic operation has an absorbing coordinate.
// That decides the defining for-every-term condition because operations
// owning an absorbing coordinate compose: in f(g_1,...,g_k), following f's
// absorbing slot into g_i's absorbing slot produces an absorbing slot of the
// composite, and projections absorb trivially. Exactness of the certificate
// for idempotent algebras is the blocker characterization of cube terms.
inline std::vector<BlockerPair> find_blockers_basic(const FiniteAlgebra& alg) {
    if (!all_operations_idempotent(alg)) {
        throw usage_error("find_blockers_basic requires idempotent basic operations; "
                          "run the general pipeline instead");
    }
    std::vector<std::uint32_t> subs = detail::subuniverse_masks(alg);
    std::vector<BlockerPair> out;
    for (std::uint32_t bm : subs) {
        std::vector<Elem> b_set = detail::mask_to_set(bm, alg.size);
        if (b_set.size() < 2) continue;
        for (std::uint32_t dm : subs) {
            if ((dm & bm) != dm || dm == bm) continue;
            std::vector<Elem> d_set = detail::mask_to_set(dm, alg.size);
            BlockerPair pair;
            pair.d = d_set;
            pair.b = b_set;
            bool blocked = true;
            for (const Operation& op : alg.operations) {
                int i = detail::absorbing_coordinate(alg, op, b_set, d_set);
                if (i < 0) {
                    blocked = false;
                    break;
                }
                pair.absorbing[op.name] = i;
            }
            if (blocked) out.push_back(std::move(pair));
        }
    }
    return out;
}

// One-sided certificate for the pair order a < b: a term sending the columns
// of {a,b}^L minus the all-a row to the constant-a row. Success at L implies
// success at any longer length (duplicate rows), so absence here only means
// "no witness at this length" -- refutations come from blocker structure,
// never from bounded search.
inline std::optional<Term> prec_at_length(const FiniteAlgebra& alg, Elem a, Elem b, int length,
                                          ClosureLimits limits = {}) {
    if (a == b) throw usage_error("prec: elements must be distinct");
    if (length < 1) throw usage_error("prec: length must be positive");
    std::vector<Code> gens;
    std::vector<Elem> tuple(length);
    for (std::uint64_t mask = 0; mask + 1 < (std::uint64_t{1} << length); ++mask) {
        // bit r of mask set -> coordinate r holds b; skip the all-a tuple
        // (mask with all bits set is the all-b tuple, still a generator)
        for (int r = 0; r < length; ++r) tuple[r] = ((mask >> r) & 1) ? a : b;
        gens.push_back(encode_tuple(tuple, alg.size));
    }
    std::sort(gens.begin(), gens.end());
    IdempotentClosure closure(alg, length, std::move(gens), limits, true);
    std::vector<Elem> target(length, a);
    Code target_code = encode_tuple(target, alg.size);
    if (!closure.contains(target_code)) return std::nullopt;
    return closure.term_for(target_code);
}

struct PrecResult {
    bool holds = false;
    int length = 0;       // witness length when holds, else the bound searched
    std::optional<Term> witness;
};

inline PrecResult prec_bounded(const FiniteAlgebra& alg, Elem a, Elem b, int length_max,
                               ClosureLimits limits = {}) {
    if (a == b) throw usage_error("prec: elements must be distinct");
    for (int length = 1; length <= length_max; ++length) {
        std::optional<Term> t = prec_at_length(alg, a, b, length, limits);
        if (t) return PrecResult{true, length, std::move(t)};
    }
    return PrecResult{false, length_max, std::nullopt};
}

// Checks the full identity scheme of the pattern: for every row r and every
// pair (x,y) in A^2, substituting y into exactly the variables whose column
// contains r must give back x.
inline bool verify_cube_witness(const FiniteAlgebra& alg, const CubePattern& pattern, const Term& term) {
    std::vector<Elem> assignment(pattern.columns.size());
    for (int r = 0; r < pattern.dimension; ++r) {
        for (int x = 0; x < alg.size; ++x) {
            for (int y = 0; y < alg.size; ++y) {
                for (std::size_t j = 0; j < pattern.columns.size(); ++j) {
                    assignment[j] = ((pattern.columns[j] >> r) & 1) ? static_cast<Elem>(y)
                                                                    : static_cast<Elem>(x);
                }
                if (term.evaluate(alg, assignment) != x) return false;
            }
        }
    }
    return true;
}

// Searches for a term witnessing the pattern's identity scheme. Coordinates
// of the evaluation power are the pairs (row, (x,y)) with x != y -- the
// column of generator j holds y exactly when column j has a 1 in that row.
// A diagonal block is appended when some basic operation is not idempotent,
// which pins the searched terms to the idempotent clone; with an idempotent
// presentation the diagonal would be constant and is omitted.
inline std::optional<Term> find_cube_term_witness(const FiniteAlgebra& alg, const CubePattern& pattern,
                                                  ClosureLimits limits = {}) {
    const int n = alg.size;
    const bool tagged = !all_operations_idempotent(alg);
    struct Point {
        int row;
        Elem x, y;
        bool diagonal;
    };
    std::vector<Point> points;
    for (int r = 0; r < pattern.dimension; ++r) {
        for (int x = 0; x < n; ++x) {
            for (int y = 0; y < n; ++y) {
                if (x != y) points.push_back({r, static_cast<Elem>(x), static_cast<Elem>(y), false});
            }
        }
    }
    if (tagged) {
        for (int x = 0; x < n; ++x) points.push_back({0, static_cast<Elem>(x), static_cast<Elem>(x), true});
    }
    const int width = static_cast<int>(points.size());
    std::vector<std::vector<Elem>> generators(pattern.columns.size(), std::vector<Elem>(width));
    std::vector<Elem> target(width);
    for (int p = 0; p < width; ++p) {
        const Point& pt = points[p];
        target[p] = pt.x;
        for (std::size_t j = 0; j < pattern.columns.size(); ++j) {
            bool wants_y = !pt.diagonal && ((pattern.columns[j] >> pt.row) & 1);
            generators[j][p] = wants_y ? pt.y : pt.x;
        }
    }
    VectorClosure closure(alg, width, std::move(generators), limits, true, target);
    auto idx = closure.index_of(target);
    if (!idx) return std::nullopt;
    Term t = closure.term_for(*idx);
    if (!verify_cube_witness(alg, pattern, t)) {
        throw inconsistency_error("cube witness failed re-verification");
    }
    return t;
}

namespace detail {

// NU patterns first (d = 3..d_max), then full cubes (d = 2..d_max). The full
// cube at dimension d is the weakest d-dimensional pattern: any d-cube term
// induces a full-cube witness by renaming variables to their columns.
inline std::vector<CubePattern> canonical_patterns(int d_max) {
    std::vector<CubePattern> out;
    for (int d = 3; d <= d_max; ++d) out.push_back(CubePattern::near_unanimity(d));
    for (int d = 2; d <= d_max; ++d) out.push_back(CubePattern::full_cube(d));
    return out;
}

inline std::optional<std::pair<CubePattern, Term>> try_patterns(const FiniteAlgebra& alg,
                                                                const CubeOptions& opts,
                                                                bool& budget_hit) {
    for (const CubePattern& pattern : canonical_patterns(opts.d_max)) {
        try {
            std::optional<Term> t = find_cube_term_witness(alg, pattern, opts.limits);
            if (t) return std::make_pair(pattern, std::move(*t));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Resource) throw;
            budget_hit = true;
        }
    }
    return std::nullopt;
}

// The k-ary cross over (B, D): tuples from B^k with at least one D entry.
inline TupleSet cross_set(const FiniteAlgebra& alg, const std::vector<Elem>& b_set,
                          const std::vector<Elem>& d_set, int k) {
    std::uint32_t dm = set_to_mask(d_set);
    TupleSet out(alg.size, k);
    std::vector<std::size_t> odo(k, 0);
    std::vector<Elem> tuple(k);
    for (;;) {
        bool has_d = false;
        for (int p = 0; p < k; ++p) {
            tuple[p] = b_set[odo[p]];
            if (dm & (1u << tuple[p])) has_d = true;
        }
        if (has_d) out.insert(encode_tuple(tuple, alg.size));
        int p = k;
        for (;;) {
            if (p == 0) return out;
            --p;
            if (++odo[p] < b_set.size()) break;
            odo[p] = 0;
        }
    }
}

} // namespace detail

// Decides cube-term existence.
//
// Idempotent presentation: the blocker scan is exact, so the answer is a
// proof either way (witness extraction may still run out of pattern budget,
// which is reported as BudgetExhausted, never as a refutation).
//
// Otherwise the idempotent clone is approximated level by level: at level m
// every idempotent term operation of arity <= m is materialized and the
// exact scan runs against those. No blockers at some level proves a cube
// term (and the witness found there rewrites to a term of the original
// algebra). Blockers surviving at m_max are then attacked through cross
// closures: a genuine blocker of the idempotent reduct keeps every k-ary
// cross closed, so any escape refutes the candidate. Candidates surviving
// k_max cross checks are reported as BlockerCandidate -- evidence, not
// proof. If every candidate is refuted, the reduct has no blockers at all
// and only the witness search remains.
inline CubeAnalysis has_cube_term(const FiniteAlgebra& alg, const CubeOptions& opts = {}) {
    CubeAnalysis analysis;
    if (alg.size > opts.universe_bound) {
        analysis.status = CubeStatus::BudgetExhausted;
        analysis.note = "universe exceeds the subuniverse enumeration bound";
        return analysis;
    }

    if (all_operations_idempotent(alg)) {
        std::vector<BlockerPair> blockers = find_blockers_basic(alg);
        analysis.level_reached = 0;
        if (!blockers.empty()) {
            analysis.status = CubeStatus::BlockerCertified;
            analysis.blocker = std::move(blockers.front());
            return analysis;
        }
        bool budget_hit = false;
        auto witness = detail::try_patterns(alg, opts, budget_hit);
        if (witness) {
            analysis.status = CubeStatus::HasCubeTerm;
            analysis.witness = std::move(witness);
            return analysis;
        }
        analysis.status = CubeStatus::BudgetExhausted;
        analysis.note = budget_hit ? "no blockers; witness search hit the closure budget"
                                   : "no blockers; no witness within the pattern budget";
        return analysis;
    }

    std::vector<BlockerPair> candidates;
    int level = 0;
    for (int m = 1; m <= opts.m_max; ++m) {
        LevelApproximation approx;
        try {
            approx = idempotent_level_approximation(alg, m, opts.limits);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Resource) throw;
            analysis.status = CubeStatus::BudgetExhausted;
            analysis.level_reached = level;
            analysis.note = "level " + std::to_string(m) + " materialization: " + e.what();
            return analysis;
        }
        level = m;
        std::vector<BlockerPair> blockers = find_blockers_basic(approx.algebra);
        if (blockers.empty()) {
            // the approximation is idempotent and blocker-free, so it has a
            // cube term; that term is an idempotent term of the original
            // algebra
            bool budget_hit = false;
            auto witness = detail::try_patterns(approx.algebra, opts, budget_hit);
            analysis.level_reached = m;
            if (witness) {
                std::vector<Term> args;
                // rewrite the materialized operations back to base terms
                std::function<Term(const Term&)> rewrite = [&](const Term& t) -> Term {
                    const TermNode* n = t.node().get();
                    if (n->var >= 0) return t;
                    std::vector<Term> children;
                    for (const TermPtr& c : n->children) children.push_back(rewrite(Term(c)));
                    int idx = approx.algebra.op_index(n->op);
                    return approx.defining_terms[idx].substitute(children);
                };
                Term base_term = rewrite(witness->second);
                if (!verify_cube_witness(alg, witness->first, base_term)) {
                    throw inconsistency_error("rewritten cube witness failed re-verification");
                }
                analysis.status = CubeStatus::HasCubeTerm;
                analysis.witness = std::make_pair(witness->first, std::move(base_term));
                return analysis;
            }
            analysis.status = CubeStatus::BudgetExhausted;
            analysis.note = "level " + std::to_string(m) +
                            " has no blockers; no witness within the pattern budget";
            return analysis;
        }
        candidates = std::move(blockers);
    }

    analysis.level_reached = level;
    for (BlockerPair& cand : candidates) {
        bool refuted = false;
        for (int k = 1; k <= opts.k_max && !refuted; ++k) {
            analysis.cross_depth_reached = std::max(analysis.cross_depth_reached, k);
            TupleSet cross = detail::cross_set(alg, cand.b, cand.d, k);
            try {
                TupleSet closed = idempotent_image_closure(alg, k, cross, opts.limits);
                if (!(closed == cross)) refuted = true;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Resource) throw;
                analysis.status = CubeStatus::BudgetExhausted;
                analysis.note = "cross check at k=" + std::to_string(k) + ": " + e.what();
                return analysis;
            }
        }
        if (!refuted) {
            analysis.status = CubeStatus::BlockerCandidate;
            analysis.blocker = std::move(cand);
            analysis.note = "candidate survived cross checks up to k=" + std::to_string(opts.k_max) +
                            "; not a proof for non-idempotent presentations";
            return analysis;
        }
    }

    // every surviving level-m_max pair was refuted as a blocker of the
    // idempotent reduct, and any reduct blocker would appear among them, so
    // the reduct is blocker-free and a cube term exists
    bool budget_hit = false;
    auto witness = detail::try_patterns(alg, opts, budget_hit);
    if (witness) {
        analysis.status = CubeStatus::HasCubeTerm;
        analysis.witness = std::move(witness);
        analysis.note = "all level-" + std::to_string(opts.m_max) + " candidates refuted by cross checks";
        return analysis;
    }
    analysis.status = CubeStatus::BudgetExhausted;
    analysis.note = "all blocker candidates refuted; no witness within the pattern budget";
    return analysis;
}

namespace detail {

// Restriction of an algebra to a subset closed under all of its operations.
// Elements are renamed to their positions in the subset.
inline FiniteAlgebra induced_algebra(const FiniteAlgebra& alg, const std::vector<Elem>& subset) {
    std::vector<int> position(alg.size, -1);
    for (std::size_t i = 0; i < subset.size(); ++i) position[subset[i]] = static_cast<int>(i);
    FiniteAlgebra out;
    out.size = static_cast<int>(subset.size());
    for (const Operation& op : alg.operations) {
        Operation ind;
        ind.name = op.name;
        ind.arity = op.arity;
        std::uint64_t len = checked_pow(static_cast<std::uint64_t>(out.size),
                                        static_cast<std::uint64_t>(op.arity));
        ind.table.resize(len);
        std::vector<std::size_t> odo(op.arity, 0);
        std::vector<Elem> args(op.arity);
        for (std::uint64_t idx = 0; idx < len; ++idx) {
            for (int p = 0; p < op.arity; ++p) args[p] = subset[odo[p]];
            Elem v = alg.apply(op, args);
            if (position[v] < 0) {
                throw inconsistency_error("induced algebra: subset is not closed under " + op.name);
            }
            ind.table[idx] = static_cast<Elem>(position[v]);
            for (int p = op.arity; p-- > 0;) {
                if (++odo[p] < subset.size()) break;
                odo[p] = 0;
            }
        }
        out.operations.push_back(std::move(ind));
    }
    return out;
}

// The operations a blocker analysis at the given level certifies against:
// the basic operations themselves for an idempotent presentation (level 0),
// otherwise the materialized idempotent term operations of that level.
inline FiniteAlgebra analysis_operations(const FiniteAlgebra& alg, int level,
                                         const ClosureLimits& limits) {
    if (level == 0) return alg;
    return idempotent_level_approximation(alg, level, limits).algebra;
}

} // namespace detail

// Smallest idempotent subuniverse (at least 2 elements) whose induced
// algebra still carries a blocker, scanned ascending by size then mask.
inline std::vector<Elem> minimal_no_cube_subuniverse(const FiniteAlgebra& alg,
                                                     const CubeAnalysis& analysis,
                                                     const CubeOptions& opts = {}) {
    if (analysis.status != CubeStatus::BlockerCertified &&
        analysis.status != CubeStatus::BlockerCandidate) {
        throw usage_error("minimal_no_cube_subuniverse needs a blocker-bearing analysis");
    }
    FiniteAlgebra ops = detail::analysis_operations(alg, analysis.level_reached, opts.limits);
    for (const std::vector<Elem>& subset :
         enumerate_idempotent_subuniverses(alg, opts.universe_bound, opts.limits)) {
        if (subset.size() < 2) continue;
        FiniteAlgebra induced = detail::induced_algebra(ops, subset);
        if (!find_blockers_basic(induced).empty()) return subset;
    }
    throw inconsistency_error("no subuniverse with a blocker despite a blocker-bearing analysis");
}

// The data the window construction starts from: a blocker (D,B) of the
// induced algebra on the minimal subuniverse, with B the whole subuniverse,
// plus the least a in B minus D and least b in D. For the minimal
// subuniverse, a does not sit below b in the pair order; prec_bounded runs
// as a cheap probe and any Holds outcome is an implementation fault.
struct WitnessSelection {
    std::vector<Elem> b_min;
    std::vector<Elem> d;
    std::vector<Elem> b;
    Elem low_a = 0;   // a in B \ D
    Elem low_b = 0;   // b in D
};

inline WitnessSelection pick_blocker_witness(const FiniteAlgebra& alg, const CubeAnalysis& analysis,
                                             const std::vector<Elem>& b_min,
                                             const CubeOptions& opts = {}, int probe_length = 3) {
    FiniteAlgebra ops = detail::analysis_operations(alg, analysis.level_reached, opts.limits);
    FiniteAlgebra induced = detail::induced_algebra(ops, b_min);
    std::vector<BlockerPair> blockers = find_blockers_basic(induced);
    WitnessSelection sel;
    sel.b_min = b_min;
    bool found = false;
    for (const BlockerPair& pair : blockers) {
        if (pair.b.size() == b_min.size()) {
            sel.d.clear();
            for (Elem e : pair.d) sel.d.push_back(b_min[e]);
            sel.b = b_min;
            found = true;
            break;
        }
    }
    if (!found) {
        throw inconsistency_error("minimal subuniverse has no blocker with full top set");
    }
    std::uint32_t dm = detail::set_to_mask(sel.d);
    for (Elem e : sel.b) {
        if (!(dm & (1u << e))) {
            sel.low_a = e;
            break;
        }
    }
    sel.low_b = sel.d.front();
    PrecResult probe = prec_bounded(alg, sel.low_a, sel.low_b, probe_length, opts.limits);
    if (probe.holds) {
        throw inconsistency_error("selected witness elements admit a pair-order certificate; "
                                  "blocker selection is inconsistent");
    }
    return sel;
}

} // namespace cubewright
