#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/term.hpp"
#include "cubewright/vector_closure.hpp"

namespace cubewright {

// The engine underneath every term-condition decision here: close the
// projection vectors, restricted to a chosen list of evaluation points,
// under the basic operations applied pointwise. An identity s = t in n
// variables holds in the variety generated by the algebra exactly when s and
// t agree on every assignment in A^n, so a schema that contains every
// assignment instantiating an identity decides that identity exactly.
inline VectorClosure free_restriction_closure(const FiniteAlgebra& alg, int n_vars,
                                              const std::vector<std::vector<Elem>>& points,
                                              ClosureLimits limits = {}, bool track_parents = true) {
    const int width = static_cast<int>(points.size());
    std::vector<std::vector<Elem>> projections(n_vars, std::vector<Elem>(width));
    for (int p = 0; p < width; ++p) {
        if (static_cast<int>(points[p].size()) != n_vars) {
            throw usage_error("free_restriction_closure: point arity mismatch");
        }
        for (int v = 0; v < n_vars; ++v) projections[v][p] = points[p][v];
    }
    return VectorClosure(alg, width, std::move(projections), limits, track_parents);
}

// True when the two terms evaluate equally on every assignment in the
// schema. With the full assignment space as schema this decides the identity
// in the generated variety.
inline bool verify_term_identities(const FiniteAlgebra& alg, const Term& lhs, const Term& rhs,
                                   const std::vector<std::vector<Elem>>& schema) {
    for (const std::vector<Elem>& point : schema) {
        if (lhs.evaluate(alg, point) != rhs.evaluate(alg, point)) return false;
    }
    return true;
}

inline std::vector<std::vector<Elem>> all_assignments(const FiniteAlgebra& alg, int n_vars) {
    std::uint64_t count = checked_pow(static_cast<std::uint64_t>(alg.size),
                                      static_cast<std::uint64_t>(n_vars));
    std::vector<std::vector<Elem>> out;
    out.reserve(count);
    std::vector<Elem> buf(n_vars);
    for (std::uint64_t c = 0; c < count; ++c) {
        decode_tuple(c, alg.size, buf);
        out.push_back(buf);
    }
    return out;
}

enum class SearchStatus {
    Found,
    Absent,        // proven: the closure ran to completion without a match
    Inconclusive,  // a resource cap fired before the search space closed
};

inline const char* to_string(SearchStatus s) {
    switch (s) {
        case SearchStatus::Found: return "found";
        case SearchStatus::Absent: return "absent";
        case SearchStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct WnuResult {
    SearchStatus status = SearchStatus::Inconclusive;
    std::optional<Term> term;
    std::string note;
};

// Full re-verification of a weak near-unanimity term: idempotent, and all
// one-y substitutions agree, over every pair (x,y) in A^2.
inline bool verify_wnu(const FiniteAlgebra& alg, const Term& term, int n) {
    std::vector<Elem> point(n);
    for (int a = 0; a < alg.size; ++a) {
        point.assign(n, static_cast<Elem>(a));
        if (term.evaluate(alg, point) != a) return false;
    }
    for (int x = 0; x < alg.size; ++x) {
        for (int y = 0; y < alg.size; ++y) {
            if (x == y) continue;
            std::optional<Elem> common;
            for (int j = 0; j < n; ++j) {
                point.assign(n, static_cast<Elem>(x));
                point[j] = static_cast<Elem>(y);
                Elem v = term.evaluate(alg, point);
                if (!common) {
                    common = v;
                } else if (*common != v) {
                    return false;
                }
            }
        }
    }
    return true;
}

// Searches for an n-ary weak near-unanimity term. The schema holds the one-y
// assignments for every ordered pair x != y together with the diagonals, so
// a vector that is diagonal-fixed and position-independent on the one-y
// block reconstructs to a genuine WNU term; a completed closure without such
// a vector proves there is none.
inline WnuResult find_wnu(const FiniteAlgebra& alg, int n, ClosureLimits limits = {},
                          const std::vector<std::vector<Elem>>& extra_points = {}) {
    if (n < 2) throw usage_error("find_wnu: arity must be at least 2");
    struct OneY {
        Elem x, y;
        std::vector<int> positions;  // point index per argument slot
    };
    std::vector<std::vector<Elem>> points;
    std::vector<OneY> groups;
    for (int x = 0; x < alg.size; ++x) {
        for (int y = 0; y < alg.size; ++y) {
            if (x == y) continue;
            OneY g{static_cast<Elem>(x), static_cast<Elem>(y), {}};
            for (int j = 0; j < n; ++j) {
                std::vector<Elem> p(n, static_cast<Elem>(x));
                p[j] = static_cast<Elem>(y);
                g.positions.push_back(static_cast<int>(points.size()));
                points.push_back(std::move(p));
            }
            groups.push_back(std::move(g));
        }
    }
    std::vector<int> diagonal;
    for (int a = 0; a < alg.size; ++a) {
        diagonal.push_back(static_cast<int>(points.size()));
        points.push_back(std::vector<Elem>(n, static_cast<Elem>(a)));
    }
    for (const auto& p : extra_points) points.push_back(p);

    WnuResult result;
    try {
        VectorClosure closure = free_restriction_closure(alg, n, points, limits, true);
        for (std::uint32_t i = 0; i < closure.size(); ++i) {
            std::span<const Elem> vec = closure.vector(i);
            bool ok = true;
            for (int a = 0; a < alg.size && ok; ++a) {
                if (vec[diagonal[a]] != a) ok = false;
            }
            for (const OneY& g : groups) {
                if (!ok) break;
                Elem first = vec[g.positions[0]];
                for (int j = 1; j < n; ++j) {
                    if (vec[g.positions[j]] != first) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) {
                Term t = closure.term_for(i);
                if (!verify_wnu(alg, t, n)) {
                    throw inconsistency_error("WNU candidate failed full re-verification");
                }
                result.status = SearchStatus::Found;
                result.term = std::move(t);
                return result;
            }
        }
        result.status = SearchStatus::Absent;
        return result;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Resource) throw;
        result.status = SearchStatus::Inconclusive;
        result.note = e.what();
        return result;
    }
}

// The chain of idempotent 4-ary terms characterizing omission of tame
// congruence types 1 and 5: f_0 = x, f_{2m+1} = v, consecutive terms agree
// on (x,y,y,y) at even indices and on both (x,x,y,y) and (x,y,x,y) at odd
// indices, as identities of the generated variety.
struct Omit15Chain {
    int m = 0;
    std::vector<Term> terms;  // 2m+2 of them, in variables (x,y,u,v)
};

struct Omit15Result {
    SearchStatus status = SearchStatus::Inconclusive;
    std::optional<Omit15Chain> chain;
    std::string note;
};

inline bool verify_omit15_chain(const FiniteAlgebra& alg, const Omit15Chain& chain) {
    if (chain.terms.size() != static_cast<std::size_t>(2 * chain.m + 2)) return false;
    const Term& first = chain.terms.front();
    const Term& last = chain.terms.back();
    std::vector<Elem> p(4);
    // endpoint identities over every assignment
    for (const auto& point : all_assignments(alg, 4)) {
        if (first.evaluate(alg, point) != point[0]) return false;
        if (last.evaluate(alg, point) != point[3]) return false;
    }
    // idempotence of every link
    for (const Term& t : chain.terms) {
        for (int a = 0; a < alg.size; ++a) {
            p.assign(4, static_cast<Elem>(a));
            if (t.evaluate(alg, p) != a) return false;
        }
    }
    // stepwise identities over all pairs
    for (std::size_t i = 0; i + 1 < chain.terms.size(); ++i) {
        const Term& lhs = chain.terms[i];
        const Term& rhs = chain.terms[i + 1];
        for (int x = 0; x < alg.size; ++x) {
            for (int y = 0; y < alg.size; ++y) {
                Elem ex = static_cast<Elem>(x), ey = static_cast<Elem>(y);
                if (i % 2 == 0) {
                    p = {ex, ey, ey, ey};
                    if (lhs.evaluate(alg, p) != rhs.evaluate(alg, p)) return false;
                } else {
                    p = {ex, ex, ey, ey};
                    if (lhs.evaluate(alg, p) != rhs.evaluate(alg, p)) return false;
                    p = {ex, ey, ex, ey};
                    if (lhs.evaluate(alg, p) != rhs.evaluate(alg, p)) return false;
                }
            }
        }
    }
    return true;
}

// Decides the chain condition by breadth-first search over the closure of
// the projections on the defining substitution shapes. Vectors are grouped
// by their values on the (x,y,y,y) block (even steps) and on the
// (x,x,y,y)/(x,y,x,y) block (odd steps); a chain is exactly an alternating
// walk from the x-projection to the v-projection through idempotent vectors
// whose final step is even. The BFS is layered, so the returned chain has
// the least m realizable inside the computed closure; since the closure
// holds every term vector on the schema, absence after a completed closure
// is a proof.
inline Omit15Result find_omit15_chain(const FiniteAlgebra& alg, ClosureLimits limits = {},
                                      const std::vector<std::vector<Elem>>& extra_points = {}) {
    std::vector<std::vector<Elem>> points;
    std::map<std::vector<Elem>, int> point_index;
    auto add_point = [&](std::vector<Elem> p) {
        auto it = point_index.find(p);
        if (it != point_index.end()) return it->second;
        int idx = static_cast<int>(points.size());
        point_index.emplace(p, idx);
        points.push_back(std::move(p));
        return idx;
    };
    std::vector<int> even_block, odd_block, diagonal;
    for (int x = 0; x < alg.size; ++x) {
        for (int y = 0; y < alg.size; ++y) {
            Elem ex = static_cast<Elem>(x), ey = static_cast<Elem>(y);
            even_block.push_back(add_point({ex, ey, ey, ey}));
            odd_block.push_back(add_point({ex, ex, ey, ey}));
            odd_block.push_back(add_point({ex, ey, ex, ey}));
        }
    }
    for (int a = 0; a < alg.size; ++a) {
        diagonal.push_back(add_point(std::vector<Elem>(4, static_cast<Elem>(a))));
    }
    for (const auto& p : extra_points) {
        if (!point_index.count(p)) add_point(p);
    }

    Omit15Result result;
    try {
        VectorClosure closure = free_restriction_closure(alg, 4, points, limits, true);
        const std::uint32_t count = static_cast<std::uint32_t>(closure.size());

        auto idempotent_node = [&](std::uint32_t i) {
            std::span<const Elem> vec = closure.vector(i);
            for (int a = 0; a < alg.size; ++a) {
                if (vec[diagonal[a]] != a) return false;
            }
            return true;
        };
        auto block_key = [&](std::uint32_t i, const std::vector<int>& block) {
            std::span<const Elem> vec = closure.vector(i);
            std::string key;
            key.reserve(block.size());
            for (int p : block) key.push_back(static_cast<char>(vec[p]));
            return key;
        };

        std::unordered_map<std::string, std::vector<std::uint32_t>> even_groups, odd_groups;
        for (std::uint32_t i = 0; i < count; ++i) {
            if (!idempotent_node(i)) continue;
            even_groups[block_key(i, even_block)].push_back(i);
            odd_groups[block_key(i, odd_block)].push_back(i);
        }

        // projections seed the closure, so their vectors are present
        std::uint32_t x_node = *closure.index_of(closure.vector(0));
        std::vector<Elem> v_proj(points.size());
        for (std::size_t p = 0; p < points.size(); ++p) v_proj[p] = points[p][3];
        std::uint32_t v_node = *closure.index_of(v_proj);

        // state: node * parity of the next step (0 = even step next)
        auto state_id = [count](std::uint32_t node, int parity) { return node * 2 + parity; };
        std::vector<std::int64_t> prev(static_cast<std::size_t>(count) * 2, -2);  // -2 unvisited
        std::deque<std::uint32_t> queue;
        prev[state_id(x_node, 0)] = -1;
        queue.push_back(state_id(x_node, 0));
        std::int64_t accept = -1;
        while (!queue.empty() && accept < 0) {
            std::uint32_t s = queue.front();
            queue.pop_front();
            std::uint32_t node = s / 2;
            int parity = static_cast<int>(s % 2);
            const auto& groups = (parity == 0) ? even_groups : odd_groups;
            const auto& block = (parity == 0) ? even_block : odd_block;
            auto it = groups.find(block_key(node, block));
            if (it == groups.end()) continue;
            for (std::uint32_t next : it->second) {
                std::uint32_t ns = state_id(next, 1 - parity);
                if (prev[ns] != -2) continue;
                prev[ns] = s;
                if (parity == 0 && next == v_node) {
                    accept = ns;
                    break;
                }
                queue.push_back(ns);
            }
        }
        if (accept < 0) {
            result.status = SearchStatus::Absent;
            return result;
        }

        std::vector<std::uint32_t> path_nodes;
        for (std::int64_t s = accept; s != -1; s = prev[s]) {
            path_nodes.push_back(static_cast<std::uint32_t>(s) / 2);
        }
        std::reverse(path_nodes.begin(), path_nodes.end());
        // steps alternate even, odd, ..., even; an accepted walk has odd length
        Omit15Chain chain;
        chain.m = static_cast<int>((path_nodes.size() - 2) / 2);
        for (std::size_t i = 0; i < path_nodes.size(); ++i) {
            if (i == 0) {
                chain.terms.push_back(Term::variable(0));
            } else if (i + 1 == path_nodes.size()) {
                chain.terms.push_back(Term::variable(3));
            } else {
                chain.terms.push_back(closure.term_for(path_nodes[i]));
            }
        }
        if (!verify_omit15_chain(alg, chain)) {
            throw inconsistency_error("omit-{1,5} chain failed full re-verification");
        }
        result.status = SearchStatus::Found;
        result.chain = std::move(chain);
        return result;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Resource) throw;
        result.status = SearchStatus::Inconclusive;
        result.note = e.what();
        return result;
    }
}

} // namespace cubewright
