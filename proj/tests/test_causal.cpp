// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcfg/causal.hpp"
#include "dcfg/errors.hpp"
#include "support.hpp"

#include <string>

using namespace dcfg;

TEST_CASE("independent marginals") {
    auto g = builtin::independent_binary(3);
    Rng rng(11);
    std::vector<int> ones(3, 0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        auto s = sample_attributes(g, rng);
        for (int i = 0; i < 3; ++i) ones[static_cast<size_t>(i)] += s.pa[static_cast<size_t>(i)];
    }
    for (int c : ones) CHECK(std::abs(c / double(n) - 0.5) < 0.01);
}

TEST_CASE("copy mechanism and degenerate prior") {
    auto g = test::chain2();
    Rng rng(1);
    for (int k = 0; k < 1000; ++k) {
        auto s = sample_attributes(g, rng);
        CHECK(s.pa[0] == s.pa[1]);
    }
    CausalGraph one({{"a", 2}}, {}, {{"a", {1.0, 0.0}}}, {});
    for (int k = 0; k < 200; ++k) CHECK(sample_attributes(one, rng).pa[0] == 0);
}

TEST_CASE("counterfactual attributes") {
    auto ind = builtin::independent_binary(2);
    auto iv = make_intervention(ind, {{"a1", 1}});
    CHECK(counterfactual_attributes(ind, {0, 0}, {0, 0}, iv) == AttributeVector{1, 0});
    CHECK(counterfactual_attributes(ind, {0, 1}, {0, 0}, iv) == AttributeVector{1, 1});

    auto chain = test::chain2();
    CHECK(counterfactual_attributes(chain, {0, 0}, {0, 0}, make_intervention(chain, {{"a1", 1}})) ==
          AttributeVector{1, 1});
    CHECK(counterfactual_attributes(chain, {1, 1}, {0, 0}, Intervention{}) == AttributeVector{1, 1});
    CHECK_THROWS_AS(make_intervention(chain, {{"zz", 1}}), ConfigError);
    CHECK_THROWS_AS(make_intervention(chain, {{"a1", 2}}), ConfigError);
}

TEST_CASE("exogenous value held fixed") {
    // finding = age OR u-dependent noise; the exogenous draw must survive the action.
    auto g = builtin::age_finding();
    const int age = g.index_of("age"), finding = g.index_of("finding");
    Rng rng(5);
    for (int k = 0; k < 500; ++k) {
        auto s = sample_attributes(g, rng);
        auto iv = make_intervention(g, {{"age", 1 - s.pa[static_cast<size_t>(age)]}});
        auto cf = counterfactual_attributes(g, s.pa, s.u, iv);
        CHECK(cf[static_cast<size_t>(finding)] == g.evaluate(finding, cf, s.u[static_cast<size_t>(finding)]));
        CHECK(cf[static_cast<size_t>(g.index_of("race"))] == s.pa[static_cast<size_t>(g.index_of("race"))]);
    }
}

TEST_CASE("partition") {
    auto g3 = builtin::independent_binary(3);
    auto p = partition(g3, make_intervention(g3, {{"a2", 1}}));
    CHECK(p.affected == std::set<int>{1});
    CHECK(p.invariant == std::set<int>{0, 2});

    auto c = test::chain3();
    p = partition(c, make_intervention(c, {{"a1", 1}}));
    CHECK(p.affected == std::set<int>{0, 1, 2});
    CHECK(p.invariant.empty());

    auto af = builtin::age_finding();
    p = partition(af, make_intervention(af, {{"finding", 1}}));
    CHECK(p.affected == std::set<int>{af.index_of("finding")});
    CHECK(p.invariant.count(af.index_of("age")) == 1);
}

TEST_CASE("invariant attributes never change") {
    std::vector<CausalGraph> graphs{builtin::independent_binary(4), test::chain3(), builtin::age_finding()};
    for (const auto& g : graphs) {
        for (const auto& [pa, prob] : g.support()) {
            // Every exogenous assignment consistent with pa.
            const int k = g.size();
            std::vector<int> ucard(static_cast<size_t>(k), 1);
            for (int i = 0; i < k; ++i)
                if (!g.is_root(i)) ucard[static_cast<size_t>(i)] = g.mechanism(i).exogenous_cardinality;
            std::vector<int> u(static_cast<size_t>(k), 0);
            while (true) {
                bool consistent = true;
                for (int i = 0; i < k; ++i)
                    if (!g.is_root(i) && g.evaluate(i, pa, u[static_cast<size_t>(i)]) != pa[static_cast<size_t>(i)])
                        consistent = false;
                if (consistent) {
                    for (int a = 0; a < k; ++a)
                        for (int v = 0; v < g.node(a).cardinality; ++v) {
                            Intervention iv;
                            iv.assignments[a] = v;
                            auto cf = counterfactual_attributes(g, pa, u, iv);
                            for (int i : partition(g, iv).invariant)
                                CHECK(cf[static_cast<size_t>(i)] == pa[static_cast<size_t>(i)]);
                        }
                }
                int i = 0;
                while (i < k && ++u[static_cast<size_t>(i)] == ucard[static_cast<size_t>(i)]) u[static_cast<size_t>(i++)] = 0;
                if (i == k) break;
            }
        }
    }
}

TEST_CASE("binary flip involution") {
    auto g = builtin::independent_binary(3);
    for (const auto& [pa, prob] : g.support()) {
        InterventionSpec flip(g, {{"a2", std::nullopt}});
        auto cf = counterfactual_attributes(g, pa, {0, 0, 0}, flip.resolve(pa));
        auto back = counterfactual_attributes(g, cf, {0, 0, 0}, make_intervention(g, {{"a2", pa[1]}}));
        CHECK(back == pa);
        CHECK(cf[1] == 1 - pa[1]);
    }
}

TEST_CASE("cycle is rejected by name") {
    try {
        CausalGraph({{"a", 2}, {"b", 2}}, {{"a", "b"}, {"b", "a"}}, {}, {{"a", {1, {0, 1}}}, {"b", {1, {0, 1}}}});
        FAIL("expected a cycle error");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("cycle") != std::string::npos);
        CHECK(msg.find("a -> b -> a") != std::string::npos);
    }
}

TEST_CASE("graph validation") {
    // prior not normalized
    CHECK_THROWS_AS(CausalGraph({{"a", 2}}, {}, {{"a", {0.5, 0.6}}}, {}), ConfigError);
    // mechanism table too short
    CHECK_THROWS_AS(CausalGraph({{"a", 2}, {"b", 2}}, {{"a", "b"}}, {{"a", {0.5, 0.5}}}, {{"b", {2, {0, 1, 1}}}}),
                    ConfigError);
    // duplicate names
    CHECK_THROWS_AS(CausalGraph({{"a", 2}, {"a", 2}}, {}, {{"a", {0.5, 0.5}}}, {}), ConfigError);
    // cardinality below 2
    CHECK_THROWS_AS(CausalGraph({{"a", 1}}, {}, {{"a", {1.0}}}, {}), ConfigError);
}
