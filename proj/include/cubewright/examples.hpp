#pragma once

#include <string>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/json_io.hpp"

namespace cubewright {

struct BundledExample {
    std::string filename;
    FiniteAlgebra algebra;
};

// The workbench's standing test corpus: the 2-element meet-semilattice, the
// Z2 Maltsev algebra x+y+z, the 2-element majority algebra, the 3-chain
// min-semilattice, and a non-idempotent presentation pairing meet with the
// constant 1.
inline std::vector<BundledExample> bundled_examples() {
    auto make = [](std::string file, std::string name, int size,
                   std::vector<Operation> ops) {
        BundledExample ex;
        ex.filename = std::move(file);
        ex.algebra.name = std::move(name);
        ex.algebra.size = size;
        ex.algebra.operations = std::move(ops);
        ex.algebra.validate();
        return ex;
    };
    std::vector<BundledExample> out;
    out.push_back(make("semilattice.json", "semilattice", 2,
                       {{"meet", 2, {0, 0, 0, 1}}}));
    out.push_back(make("z2_maltsev.json", "z2_maltsev", 2,
                       {{"m", 3, {0, 1, 1, 0, 1, 0, 0, 1}}}));
    out.push_back(make("majority.json", "majority", 2,
                       {{"maj", 3, {0, 0, 0, 1, 0, 1, 1, 1}}}));
    out.push_back(make("chain3_min.json", "chain3_min", 3,
                       {{"min", 2, {0, 0, 0, 0, 1, 1, 0, 1, 2}}}));
    out.push_back(make("meet_const1.json", "meet_const1", 2,
                       {{"meet", 2, {0, 0, 0, 1}}, {"one", 0, {1}}}));
    return out;
}

// Canonical file bytes for an emitted example; re-emission is byte-identical.
inline std::string bundled_example_text(const BundledExample& ex) {
    return algebra_to_json(ex.algebra).dump(2) + "\n";
}

} // namespace cubewright
