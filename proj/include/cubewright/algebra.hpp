#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "cubewright/errors.hpp"

namespace cubewright {

// Universe elements. Tables are byte-valued, so universes are capped at 256
// elements; every search routine here is for desk-scale algebras anyway.
using Elem = std::uint8_t;

// Radix-|A| code of a tuple in A^k, leftmost coordinate most significant.
using Code = std::uint64_t;

constexpr int kMaxUniverse = 255;

// A finitary operation given by its full table. The table is indexed
// row-major: the index of (x1,...,xk) is sum x_i * size^(k-i). Arity 0 is a
// table of length 1.
struct Operation {
    std::string name;
    int arity = 0;
    std::vector<Elem> table;
};

// 64-bit power with overflow detection; throws a resource error when the
// value would not fit. Closures key tuples by such codes, so any code space
// must stay below 2^63.
inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp,
                                 std::uint64_t limit = (std::uint64_t{1} << 62)) {
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && result > limit / base) {
            throw resource_error("power " + std::to_string(base) + "^" + std::to_string(exp) +
                                 " exceeds the supported code space");
        }
        result *= base;
    }
    return result;
}

struct FiniteAlgebra {
    std::string name;
    int size = 1;
    std::vector<Operation> operations;

    std::uint64_t table_length(int arity) const {
        return checked_pow(static_cast<std::uint64_t>(size), static_cast<std::uint64_t>(arity));
    }

    Elem apply(const Operation& op, std::span<const Elem> args) const {
        std::uint64_t idx = 0;
        for (Elem a : args) idx = idx * static_cast<std::uint64_t>(size) + a;
        return op.table[idx];
    }

    // Checks every structural invariant; `where` prefixes diagnostics so
    // callers can point at the originating file.
    void validate(const std::string& where = "") const {
        auto loc = [&](const std::string& detail) {
            return where.empty() ? detail : where + ": " + detail;
        };
        if (size < 1) throw format_error(loc("size must be at least 1"));
        if (size > kMaxUniverse) {
            throw format_error(loc("size " + std::to_string(size) + " exceeds the supported maximum " +
                                   std::to_string(kMaxUniverse)));
        }
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < operations.size(); ++i) {
            const Operation& op = operations[i];
            std::string at = "operations[" + std::to_string(i) + "] (\"" + op.name + "\")";
            if (op.name.empty()) throw format_error(loc(at + ": empty name"));
            if (!seen.insert(op.name).second) {
                throw format_error(loc(at + ": duplicate operation name"));
            }
            if (op.arity < 0) throw format_error(loc(at + ": negative arity"));
            std::uint64_t want = table_length(op.arity);
            if (op.table.size() != want) {
                throw format_error(loc(at + ": table has length " + std::to_string(op.table.size()) +
                                       ", expected " + std::to_string(want)));
            }
            for (std::size_t j = 0; j < op.table.size(); ++j) {
                if (op.table[j] >= size) {
                    throw format_error(loc(at + ": table entry " + std::to_string(j) + " is " +
                                           std::to_string(int(op.table[j])) + ", out of range [0," +
                                           std::to_string(size) + ")"));
                }
            }
        }
    }

    int op_index(const std::string& opname) const {
        for (std::size_t i = 0; i < operations.size(); ++i) {
            if (operations[i].name == opname) return static_cast<int>(i);
        }
        return -1;
    }
};

// f is idempotent when f(a,...,a) = a for every a. A constant (arity 0 or
// not) can only pass on a one-element universe.
inline bool is_idempotent_operation(const FiniteAlgebra& alg, const Operation& op) {
    for (int a = 0; a < alg.size; ++a) {
        std::uint64_t idx = 0;
        for (int i = 0; i < op.arity; ++i) idx = idx * alg.size + a;
        if (op.table[idx] != a) return false;
    }
    return true;
}

inline bool all_operations_idempotent(const FiniteAlgebra& alg) {
    for (const Operation& op : alg.operations) {
        if (!is_idempotent_operation(alg, op)) return false;
    }
    return true;
}

// Same universe, only the idempotent basic operations kept. This is just the
// basic part; closing under all idempotent *term* operations is the closure
// engines' job.
inline FiniteAlgebra idempotent_basic_reduct(const FiniteAlgebra& alg) {
    FiniteAlgebra reduct;
    reduct.name = alg.name;
    reduct.size = alg.size;
    for (const Operation& op : alg.operations) {
        if (is_idempotent_operation(alg, op)) reduct.operations.push_back(op);
    }
    return reduct;
}

} // namespace cubewright
