#pragma once

// Brute-force reference implementations used only by tests. Each one takes a
// deliberately different route from the library code it checks.

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/codes.hpp"
#include "cubewright/congruence.hpp"

namespace oracles {

using cubewright::Code;
using cubewright::Elem;
using cubewright::FiniteAlgebra;
using cubewright::Operation;

// Fixpoint closure by full recomputation: repeatedly applies every basic
// operation to every argument tuple over the current set until nothing new
// appears. No frontier bookkeeping, no parent records.
inline std::set<Code> naive_sg_power(const FiniteAlgebra& alg, int k, const std::set<Code>& generators) {
    std::set<Code> current = generators;
    std::vector<Elem> buf(k);
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<Code> next = current;
        for (const Operation& op : alg.operations) {
            int r = op.arity;
            std::vector<Code> pool(current.begin(), current.end());
            if (r == 0) {
                std::vector<Elem> tup(k, op.table[0]);
                if (next.insert(cubewright::encode_tuple(tup, alg.size)).second) changed = true;
                continue;
            }
            std::vector<std::size_t> odo(r, 0);
            if (pool.empty()) continue;
            for (;;) {
                std::vector<std::vector<Elem>> args(r, std::vector<Elem>(k));
                for (int i = 0; i < r; ++i) {
                    cubewright::decode_tuple(pool[odo[i]], alg.size, args[i]);
                }
                for (int coord = 0; coord < k; ++coord) {
                    std::vector<Elem> point(r);
                    for (int i = 0; i < r; ++i) point[i] = args[i][coord];
                    buf[coord] = alg.apply(op, point);
                }
                if (next.insert(cubewright::encode_tuple(buf, alg.size)).second) changed = true;
                int i = r;
                for (;;) {
                    if (i == 0) goto op_done;
                    --i;
                    if (++odo[i] < pool.size()) break;
                    odo[i] = 0;
                }
            }
        op_done:;
        }
        current = std::move(next);
    }
    return current;
}

// Direct cube-term-blocker scan for a single-operation idempotent algebra on
// {0,1}: the only candidate pairs are ({0},{0,1}) and ({1},{0,1}), and the
// basic operation blocks exactly when it has an absorbing coordinate for one
// of them.
inline bool boolean_single_op_has_blocker(const Operation& op) {
    for (int d = 0; d <= 1; ++d) {
        bool blocked = false;
        for (int i = 0; i < op.arity && !blocked; ++i) {
            bool absorbs = true;
            for (std::uint64_t idx = 0; idx < op.table.size() && absorbs; ++idx) {
                // digit i of idx in base 2
                int shift = op.arity - 1 - i;
                int digit = (idx >> shift) & 1;
                if (digit == d && op.table[idx] != d) absorbs = false;
            }
            if (absorbs) blocked = true;
        }
        if (blocked) return true;
    }
    return false;
}

// Least congruence by componentwise closure: keep a full relation matrix,
// alternate transitive closure with adding (f(u), f(v)) for every pair of
// componentwise-related argument tuples. A different route from the unary
// translation worklist in the library.
inline std::vector<std::vector<bool>> naive_congruence(const cubewright::CarrierAlgebra& carrier,
                                                       const std::vector<std::pair<int, int>>& pairs) {
    const int c = carrier.size();
    std::vector<std::vector<bool>> rel(c, std::vector<bool>(c, false));
    for (int i = 0; i < c; ++i) rel[i][i] = true;
    for (auto [a, b] : pairs) {
        rel[a][b] = true;
        rel[b][a] = true;
    }
    bool changed = true;
    while (changed) {
        changed = false;
        // transitive closure
        for (int k = 0; k < c; ++k) {
            for (int i = 0; i < c; ++i) {
                if (!rel[i][k]) continue;
                for (int j = 0; j < c; ++j) {
                    if (rel[k][j] && !rel[i][j]) {
                        rel[i][j] = true;
                        rel[j][i] = true;
                        changed = true;
                    }
                }
            }
        }
        // compatibility
        const auto& ops = carrier.base().operations;
        for (std::size_t oi = 0; oi < ops.size(); ++oi) {
            int r = ops[oi].arity;
            if (r == 0) continue;
            std::vector<int> u(r, 0), v(r, 0);
            std::function<void(int)> rec = [&](int pos) {
                if (pos == r) {
                    int iu = carrier.apply(static_cast<int>(oi), u);
                    int iv = carrier.apply(static_cast<int>(oi), v);
                    if (!rel[iu][iv]) {
                        rel[iu][iv] = true;
                        rel[iv][iu] = true;
                        changed = true;
                    }
                    return;
                }
                for (int x = 0; x < c; ++x) {
                    for (int y = 0; y < c; ++y) {
                        if (!rel[x][y]) continue;
                        u[pos] = x;
                        v[pos] = y;
                        rec(pos + 1);
                    }
                }
            };
            rec(0);
        }
    }
    return rel;
}

// All partitions of {0..n-1} as restricted growth strings.
inline std::vector<std::vector<int>> all_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> rgs(n, 0);
    std::function<void(int, int)> rec = [&](int i, int max_used) {
        if (i == n) {
            out.push_back(rgs);
            return;
        }
        for (int b = 0; b <= max_used + 1; ++b) {
            rgs[i] = b;
            rec(i + 1, std::max(max_used, b));
        }
    };
    rec(0, -1);
    return out;
}

} // namespace oracles
