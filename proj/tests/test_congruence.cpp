#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cubewright/congruence.hpp"
#include "cubewright/closure.hpp"
#include "cubewright/examples.hpp"
#include "corpus.hpp"
#include "oracles.hpp"

using namespace cubewright;

namespace {

CarrierAlgebra full_carrier(const FiniteAlgebra& alg) {
    std::vector<Code> codes;
    for (int e = 0; e < alg.size; ++e) codes.push_back(static_cast<Code>(e));
    return CarrierAlgebra(alg, 1, std::move(codes));
}

} // namespace

TEST_CASE("partition basics", "[congruence]") {
    Partition p({0, 1, 1, 0});
    REQUIRE(p.index() == 2);
    REQUIRE(p.related(0, 3));
    REQUIRE_FALSE(p.related(0, 1));
    REQUIRE(p.blocks() == std::vector<std::vector<int>>{{0, 3}, {1, 2}});

    Partition idv = Partition::identity(3);
    REQUIRE(idv.restrict_to({0, 2}) == Partition::identity(2));
    Partition full = Partition::full(3);
    REQUIRE(full.restrict_to({1, 2}) == Partition::full(2));

    auto [cnt, blocks] = block_profile(p, 1);
    REQUIRE(cnt == 2);
    auto [cnt0, blocks0] = block_profile(Partition::identity(4), 1);
    REQUIRE(cnt0 == 0);
    auto [cnt1, blocks1] = block_profile(Partition::full(4), 1);
    REQUIRE(cnt1 == 1);
    REQUIRE(blocks1[0].size() == 4);
}

TEST_CASE("restrict and block_profile commute with relabeling", "[congruence][property]") {
    std::mt19937_64 rng(0xFACE);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 4 + static_cast<int>(rng() % 6);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) labels[i] = static_cast<int>(rng() % 3);
        Partition p(labels);
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> relabeled(n);
        for (int i = 0; i < n; ++i) relabeled[perm[i]] = labels[i];
        Partition q(relabeled);
        std::vector<int> subset, image;
        for (int i = 0; i < n; ++i) {
            if (rng() % 2) {
                subset.push_back(i);
                image.push_back(perm[i]);
            }
        }
        Partition pr = p.restrict_to(subset);
        Partition qr = q.restrict_to(image);
        REQUIRE(pr == qr);
        REQUIRE(block_profile(pr, 1).first == block_profile(qr, 1).first);
    }
}

TEST_CASE("carrier algebra verifies closedness", "[congruence]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    REQUIRE_THROWS_AS(CarrierAlgebra(sl, 2, {1, 2}), Error);
    CarrierAlgebra ok(sl, 2, {0, 1, 2});
    REQUIRE(ok.size() == 3);
    std::vector<int> args{1, 2};
    REQUIRE(ok.apply(0, args) == 0);
}

TEST_CASE("generated_congruence worked examples", "[congruence]") {
    CarrierAlgebra chain = full_carrier(fixtures::chain3_min());
    SECTION("pair (1,2) on the 3-chain") {
        Partition p = generated_congruence(chain, {{1, 2}});
        REQUIRE(p.blocks() == std::vector<std::vector<int>>{{0}, {1, 2}});
    }
    SECTION("empty pair set gives the identity") {
        REQUIRE(generated_congruence(chain, {}) == Partition::identity(3));
    }
    SECTION("two-element carrier collapses") {
        CarrierAlgebra two = full_carrier(fixtures::semilattice());
        REQUIRE(generated_congruence(two, {{0, 1}}) == Partition::full(2));
    }
    SECTION("pair (0,1) on the 3-chain forces nothing else") {
        Partition p = generated_congruence(chain, {{0, 1}});
        REQUIRE(p.blocks() == std::vector<std::vector<int>>{{0, 1}, {2}});
    }
    SECTION("pair (0,2) collapses everything") {
        REQUIRE(generated_congruence(chain, {{0, 2}}) == Partition::full(3));
    }
}

TEST_CASE("generated congruences are compatible and least", "[congruence][oracle]") {
    std::mt19937_64 rng(0x5EED5);
    for (int trial = 0; trial < 25; ++trial) {
        FiniteAlgebra alg;
        alg.size = 2 + static_cast<int>(rng() % 2);
        Operation op;
        op.name = "f";
        op.arity = 2;
        op.table.resize(static_cast<std::size_t>(alg.size) * alg.size);
        for (auto& e : op.table) e = static_cast<Elem>(rng() % alg.size);
        for (int a = 0; a < alg.size; ++a) op.table[a * alg.size + a] = static_cast<Elem>(a);
        alg.operations.push_back(op);

        int k = 1 + static_cast<int>(rng() % 2);
        TupleSet gens(alg.size, k);
        std::uint64_t space = 1;
        for (int i = 0; i < k; ++i) space *= alg.size;
        for (Code c = 0; c < space; ++c) {
            if (rng() % 2) gens.insert(c);
        }
        if (gens.empty()) gens.insert(0);
        TupleSet closed = sg_power(alg, k, gens);
        CarrierAlgebra carrier(alg, k, closed.codes());
        if (carrier.size() < 2) continue;

        std::vector<std::pair<int, int>> pairs;
        int npairs = 1 + static_cast<int>(rng() % 2);
        for (int i = 0; i < npairs; ++i) {
            pairs.emplace_back(static_cast<int>(rng() % carrier.size()),
                               static_cast<int>(rng() % carrier.size()));
        }
        Partition got = generated_congruence(carrier, pairs);

        auto rel = oracles::naive_congruence(carrier, pairs);
        for (int i = 0; i < carrier.size(); ++i) {
            for (int j = 0; j < carrier.size(); ++j) {
                REQUIRE(got.related(i, j) == static_cast<bool>(rel[i][j]));
            }
        }
    }
}

TEST_CASE("generated congruence is the meet of compatible partitions above the pairs", "[congruence][oracle]") {
    const FiniteAlgebra& chain = fixtures::chain3_min();
    CarrierAlgebra carrier = full_carrier(chain);
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            Partition got = generated_congruence(carrier, {{a, b}});
            std::vector<std::vector<int>> meets;
            for (const auto& rgs : oracles::all_partitions(3)) {
                Partition cand(rgs);
                if (!cand.related(a, b)) continue;
                bool compatible = true;
                for (int x = 0; x < 3 && compatible; ++x) {
                    for (int y = 0; y < 3 && compatible; ++y) {
                        if (!cand.related(x, y)) continue;
                        for (int z = 0; z < 3 && compatible; ++z) {
                            std::vector<int> u{x, z}, v{y, z};
                            if (!cand.related(carrier.apply(0, u), carrier.apply(0, v))) compatible = false;
                            std::vector<int> u2{z, x}, v2{z, y};
                            if (!cand.related(carrier.apply(0, u2), carrier.apply(0, v2))) compatible = false;
                        }
                    }
                }
                if (compatible) meets.push_back(cand.canonical_key());
            }
            REQUIRE_FALSE(meets.empty());
            for (int x = 0; x < 3; ++x) {
                for (int y = 0; y < 3; ++y) {
                    bool in_all = true;
                    for (const auto& key : meets) {
                        if (key[x] != key[y]) {
                            in_all = false;
                            break;
                        }
                    }
                    REQUIRE(got.related(x, y) == in_all);
                }
            }
        }
    }
}

TEST_CASE("kernel_of_projection", "[congruence]") {
    const FiniteAlgebra& sl = fixtures::semilattice();
    CarrierAlgebra carrier(sl, 2, {0, 1, 2});
    Partition by_first = kernel_of_projection(carrier, 0);
    REQUIRE(by_first.blocks() == std::vector<std::vector<int>>{{0, 1}, {2}});
    Partition by_second = kernel_of_projection(carrier, 1);
    REQUIRE(by_second.blocks() == std::vector<std::vector<int>>{{0, 2}, {1}});

    CarrierAlgebra single(sl, 1, {0});
    REQUIRE(kernel_of_projection(single, 0) == Partition::full(1));
    REQUIRE_THROWS_AS(kernel_of_projection(carrier, 5), Error);
}

TEST_CASE("all_congruences on the worked examples", "[congruence]") {
    SECTION("two-element semilattice is simple") {
        CarrierAlgebra two = full_carrier(fixtures::semilattice());
        auto cons = all_congruences(two);
        REQUIRE(cons.size() == 2);
    }
    SECTION("3-chain has exactly four congruences") {
        CarrierAlgebra chain = full_carrier(fixtures::chain3_min());
        auto cons = all_congruences(chain);
        REQUIRE(cons.size() == 4);
        std::vector<std::vector<std::vector<int>>> blocks;
        for (const auto& p : cons) blocks.push_back(p.blocks());
        REQUIRE(std::find(blocks.begin(), blocks.end(),
                          std::vector<std::vector<int>>{{0}, {1, 2}}) != blocks.end());
        REQUIRE(std::find(blocks.begin(), blocks.end(),
                          std::vector<std::vector<int>>{{0, 1}, {2}}) != blocks.end());
    }
    SECTION("one-element carrier") {
        FiniteAlgebra one;
        one.size = 1;
        CarrierAlgebra c(one, 1, {0});
        REQUIRE(all_congruences(c).size() == 1);
    }
    SECTION("cap enforcement") {
        CarrierAlgebra chain = full_carrier(fixtures::chain3_min());
        REQUIRE_THROWS_AS(all_congruences(chain, 2), Error);
    }
}
