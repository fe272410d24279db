#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "cubewright/closure.hpp"
#include "cubewright/examples.hpp"
#include "cubewright/json_io.hpp"
#include "corpus.hpp"
#include "oracles.hpp"

using namespace cubewright;

namespace {

TupleSet to_tuple_set(const FiniteAlgebra& alg, int k, std::initializer_list<Code> cs) {
    TupleSet s(alg.size, k);
    for (Code c : cs) s.insert(c);
    return s;
}

FiniteAlgebra random_algebra(std::mt19937_64& rng, int size, int num_ops, int max_arity,
                             bool idempotent) {
    FiniteAlgebra alg;
    alg.size = size;
    for (int i = 0; i < num_ops; ++i) {
        Operation op;
        op.name = "f" + std::to_string(i);
        op.arity = 1 + static_cast<int>(rng() % max_arity);
        std::uint64_t len = 1;
        for (int a = 0; a < op.arity; ++a) len *= size;
        op.table.resize(len);
        for (auto& e : op.table) e = static_cast<Elem>(rng() % size);
        if (idempotent) {
            for (int a = 0; a < size; ++a) {
                std::uint64_t idx = 0;
                for (int j = 0; j < op.arity; ++j) idx = idx * size + a;
                op.table[idx] = static_cast<Elem>(a);
            }
        }
        alg.operations.push_back(std::move(op));
    }
    return alg;
}

} // namespace

TEST_CASE("parse_algebra accepts the bundled formats", "[kernel]") {
    FiniteAlgebra sl = parse_algebra(R"({"size":2,"operations":[{"name":"meet","arity":2,"table":[0,0,0,1]}]})");
    REQUIRE(sl.size == 2);
    REQUIRE(sl.operations.size() == 1);
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            REQUIRE(sl.operations[0].table[2 * x + y] == std::min(x, y));
        }
    }

    FiniteAlgebra empty = parse_algebra(R"({"size":2,"operations":[]})");
    REQUIRE(empty.operations.empty());

    FiniteAlgebra z2 = parse_algebra(R"({"size":2,"operations":[{"name":"m","arity":3,"table":[0,1,1,0,1,0,0,1]}]})");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) REQUIRE(z2.operations[0].table[4 * x + 2 * y + z] == (x ^ y ^ z));
}

TEST_CASE("parse_algebra reports malformed inputs with location", "[kernel]") {
    REQUIRE_THROWS_AS(parse_algebra("not json"), Error);
    REQUIRE_THROWS_AS(parse_algebra(R"({"size":0,"operations":[]})"), Error);
    // table length mismatch names the offending operation
    try {
        parse_algebra(R"({"size":2,"operations":[{"name":"f","arity":2,"table":[0,0,0]}]})");
        FAIL("expected a format error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Format);
        REQUIRE(std::string(e.what()).find("operations[0]") != std::string::npos);
    }
    // out-of-range entry
    try {
        parse_algebra(R"({"size":2,"operations":[{"name":"f","arity":1,"table":[0,2]}]})");
        FAIL("expected a format error");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("out of range") != std::string::npos);
    }
    // duplicate names
    REQUIRE_THROWS_AS(
        parse_algebra(R"({"size":2,"operations":[{"name":"f","arity":0,"table":[0]},{"name":"f","arity":0,"table":[1]}]})"),
        Error);
}

TEST_CASE("idempotence of basic operations", "[kernel]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    REQUIRE(is_idempotent_operation(sl, sl.operations[0]));

    const FiniteAlgebra& mc = fixtures::meet_const1();
    REQUIRE(is_idempotent_operation(mc, mc.operations[0]));
    REQUIRE_FALSE(is_idempotent_operation(mc, mc.operations[1]));

    const FiniteAlgebra& z2 = fixtures::z2_maltsev();
    REQUIRE(is_idempotent_operation(z2, z2.operations[0]));

    FiniteAlgebra one;
    one.size = 1;
    one.operations.push_back({"c", 0, {0}});
    REQUIRE(is_idempotent_operation(one, one.operations[0]));
}

TEST_CASE("idempotent_basic_reduct keeps exactly the idempotent part", "[kernel]") {
    FiniteAlgebra reduct = idempotent_basic_reduct(fixtures::meet_const1());
    REQUIRE(reduct.operations.size() == 1);
    REQUIRE(reduct.operations[0].name == "meet");

    FiniteAlgebra z2 = idempotent_basic_reduct(fixtures::z2_maltsev());
    REQUIRE(z2.operations.size() == 1);

    FiniteAlgebra empty = parse_algebra(R"({"size":2,"operations":[]})");
    REQUIRE(idempotent_basic_reduct(empty).operations.empty());
}

TEST_CASE("sg_power on the worked examples", "[kernel]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    // {(0,1),(1,0)} closes to {(0,0),(0,1),(1,0)}
    TupleSet gens = to_tuple_set(sl, 2, {1, 2});
    TupleSet closed = sg_power(sl, 2, gens);
    REQUIRE(closed.codes() == std::vector<Code>{0, 1, 2});

    // empty generators, no constants
    TupleSet none = sg_power(sl, 2, TupleSet(sl.size, 2));
    REQUIRE(none.empty());

    // idempotence fixes singletons
    const FiniteAlgebra& z2 = fixtures::z2_maltsev();
    TupleSet single = sg_power(z2, 1, to_tuple_set(z2, 1, {0}));
    REQUIRE(single.codes() == std::vector<Code>{0});
}

TEST_CASE("term_for returns checked witnesses", "[kernel]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    SubpowerClosure closure(sl, 2, {1, 2}, {}, true);
    Term t = closure.term_for(0);
    REQUIRE(t.to_string() == "(meet x1 x2)");
    REQUIRE(closure.term_for(1).to_string() == "x1");

    const FiniteAlgebra& z2 = fixtures::z2_maltsev();
    // generators (1,1),(1,0),(0,1) -> target (0,0) via m
    SubpowerClosure zc(z2, 2, {3, 2, 1}, {}, true);
    REQUIRE(zc.contains(0));
    Term tz = zc.term_for(0);
    std::vector<Elem> assign1{1, 1, 0};
    std::vector<Elem> assign2{1, 0, 1};
    REQUIRE(tz.evaluate(z2, assign1) == 0);
    REQUIRE(tz.evaluate(z2, assign2) == 0);

    REQUIRE_THROWS_AS(zc.term_for(999), Error);
}

TEST_CASE("closure properties on random algebras", "[kernel][property]") {
    std::mt19937_64 rng(0xC0FFEE);
    for (int trial = 0; trial < 40; ++trial) {
        int size = 2 + static_cast<int>(rng() % 2);
        FiniteAlgebra alg = random_algebra(rng, size, 1 + rng() % 2, 2, false);
        int k = 1 + static_cast<int>(rng() % 3);
        std::uint64_t space = 1;
        for (int i = 0; i < k; ++i) space *= size;
        TupleSet g(alg.size, k);
        TupleSet h(alg.size, k);
        for (std::uint64_t c = 0; c < space; ++c) {
            if (rng() % 3 == 0) g.insert(c);
            if (rng() % 3 == 0) h.insert(c);
        }
        // monotonicity needs G subseteq H
        TupleSet g_union(alg.size, k);
        for (Code c : g.codes()) g_union.insert(c);
        for (Code c : h.codes()) g_union.insert(c);

        TupleSet cg = sg_power(alg, k, g);
        TupleSet cu = sg_power(alg, k, g_union);

        // generator containment
        for (Code c : g.codes()) REQUIRE(cg.contains(c));
        // monotonicity
        for (Code c : cg.codes()) REQUIRE(cu.contains(c));
        // closure idempotence
        TupleSet twice = sg_power(alg, k, cg);
        REQUIRE(twice == cg);
    }
}

TEST_CASE("sg_power agrees with the naive fixpoint oracle on size 2", "[kernel][oracle]") {
    std::mt19937_64 rng(0xBEEF);
    for (int trial = 0; trial < 30; ++trial) {
        FiniteAlgebra alg = random_algebra(rng, 2, 1 + rng() % 2, 3, false);
        int k = 1 + static_cast<int>(rng() % 3);
        std::uint64_t space = 1 << k;
        std::set<Code> gens;
        TupleSet g(alg.size, k);
        for (std::uint64_t c = 0; c < space; ++c) {
            if (rng() % 2 == 0) {
                gens.insert(c);
                g.insert(c);
            }
        }
        std::set<Code> want = oracles::naive_sg_power(alg, k, gens);
        TupleSet got = sg_power(alg, k, g);
        REQUIRE(std::vector<Code>(want.begin(), want.end()) == got.codes());
    }
}

TEST_CASE("closure output is independent of the thread count", "[kernel][determinism]") {
    std::mt19937_64 rng(0xA11CE);
    for (int trial = 0; trial < 10; ++trial) {
        FiniteAlgebra alg = random_algebra(rng, 3, 2, 3, false);
        TupleSet g(alg.size, 3);
        for (Code c = 0; c < 27; ++c) {
            if (rng() % 4 == 0) g.insert(c);
        }
        ClosureLimits serial;
        ClosureLimits parallel;
        parallel.threads = 4;
        SubpowerClosure a(alg, 3, g.codes(), serial, true);
        SubpowerClosure b(alg, 3, g.codes(), parallel, true);
        REQUIRE(a.codes_in_insertion_order() == b.codes_in_insertion_order());
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!a.codes_in_insertion_order().empty()) {
                Code c = a.codes_in_insertion_order()[i];
                REQUIRE(a.term_for(c).to_string() == b.term_for(c).to_string());
            }
        }
    }
}

TEST_CASE("closure element cap raises a resource error", "[kernel]") {
    const FiniteAlgebra& z2 = fixtures::z2_maltsev();
    ClosureLimits tight;
    tight.max_elements = 3;
    TupleSet g(z2.size, 3);
    g.insert(1);
    g.insert(2);
    g.insert(4);
    try {
        sg_power(z2, 3, g, tight);
        FAIL("expected a resource error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Resource);
    }
}

TEST_CASE("idempotent_image_closure matches sg_power on idempotent presentations", "[kernel]") {
    std::mt19937_64 rng(0xD1CE);
    for (int trial = 0; trial < 20; ++trial) {
        FiniteAlgebra alg = random_algebra(rng, 2, 1 + rng() % 2, 3, true);
        int k = 1 + static_cast<int>(rng() % 3);
        TupleSet g(alg.size, k);
        for (Code c = 0; c < (std::uint64_t{1} << k); ++c) {
            if (rng() % 2 == 0) g.insert(c);
        }
        REQUIRE(idempotent_image_closure(alg, k, g) == sg_power(alg, k, g));
    }
}

TEST_CASE("idempotent_image_closure filters non-idempotent constants", "[kernel]") {
    const FiniteAlgebra& mc = fixtures::meet_const1();
    TupleSet g(mc.size, 1);
    g.insert(0);
    TupleSet closed = idempotent_image_closure(mc, 1, g);
    REQUIRE(closed.codes() == std::vector<Code>{0});
    // the plain closure picks up the constant
    TupleSet plain = sg_power(mc, 1, g);
    REQUIRE(plain.codes() == std::vector<Code>{0, 1});

    // full power stays full
    TupleSet full(mc.size, 2);
    for (Code c = 0; c < 4; ++c) full.insert(c);
    REQUIRE(idempotent_image_closure(mc, 2, full) == full);
}

TEST_CASE("is_idempotent_subuniverse distinguishes the reduct from the full clone", "[kernel]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    REQUIRE(is_idempotent_subuniverse(sl, {0, 1}));
    REQUIRE(is_idempotent_subuniverse(sl, {0}));

    const FiniteAlgebra& mc = fixtures::meet_const1();
    REQUIRE(is_idempotent_subuniverse(mc, {0}));
    TupleSet g(mc.size, 1);
    g.insert(0);
    REQUIRE_FALSE(sg_power(mc, 1, g) == g);
}

TEST_CASE("enumerate_idempotent_subuniverses", "[kernel]") {
    auto subs = enumerate_idempotent_subuniverses(fixtures::semilattice());
    REQUIRE(subs == std::vector<std::vector<Elem>>{{0}, {1}, {0, 1}});

    auto z2subs = enumerate_idempotent_subuniverses(fixtures::z2_maltsev());
    REQUIRE(z2subs == std::vector<std::vector<Elem>>{{0}, {1}, {0, 1}});

    FiniteAlgebra one;
    one.size = 1;
    REQUIRE(enumerate_idempotent_subuniverses(one) == std::vector<std::vector<Elem>>{{0}});

    FiniteAlgebra big;
    big.size = 9;
    REQUIRE_THROWS_AS(enumerate_idempotent_subuniverses(big), Error);
}

TEST_CASE("algebra JSON round-trip is canonical", "[kernel]") {
    for (const auto& ex : bundled_examples()) {
        std::string text = bundled_example_text(ex);
        FiniteAlgebra parsed = parse_algebra(text);
        REQUIRE(algebra_to_json(parsed).dump(2) + "\n" == text);
    }
}

TEST_CASE("term parser round-trips", "[kernel]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    Term t = parse_term("(meet x1 (meet x2 x1))", &sl);
    REQUIRE(t.to_string() == "(meet x1 (meet x2 x1))");
    REQUIRE(t.arity() == 2);
    std::vector<Elem> assign{1, 0};
    REQUIRE(t.evaluate(sl, assign) == 0);
    REQUIRE_THROWS_AS(parse_term("(join x1 x2)", &sl), Error);
    REQUIRE_THROWS_AS(parse_term("(meet x1)", &sl), Error);
    REQUIRE_THROWS_AS(parse_term("x0", &sl), Error);
}
