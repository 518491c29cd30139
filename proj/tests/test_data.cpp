// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcfg/data.hpp"

#include <map>
#include <sstream>

using namespace dcfg;

TEST_CASE("balanced joint cells") {
    auto w = builtin::world("independent2");
    auto d = sample_dataset(w, 1000, 1);
    std::map<AttributeVector, int> cells;
    for (const auto& it : d.items) ++cells[it.pa];
    CHECK(cells.size() == 4);
    for (const auto& [pa, n] : cells) {
        CHECK(n >= 200);
        CHECK(n <= 300);
    }
}

TEST_CASE("zero observation noise and determinism") {
    auto w = builtin::world("independent3", 2, 1.0, 0.0);
    auto d = sample_dataset(w, 50, 2);
    for (const auto& it : d.items) CHECK(it.x0 == w.mean(it.pa));
    auto a = sample_dataset(builtin::world("age_finding"), 100, 3);
    auto b = sample_dataset(builtin::world("age_finding"), 100, 3);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.items[i].x0 == b.items[i].x0);
        CHECK(a.items[i].pa == b.items[i].pa);
        CHECK(a.items[i].u == b.items[i].u);
    }
    auto c = sample_dataset(builtin::world("age_finding"), 100, 4);
    CHECK_FALSE(a.items[0].x0 == c.items[0].x0);
}

TEST_CASE("supported cells and finite draws") {
    auto w = builtin::world("age_finding");
    auto d = sample_dataset(w, 2000, 5);
    for (const auto& it : d.items) {
        CHECK(w.graph().joint_probability(it.pa) > 0.0);
        CHECK(it.x0.allFinite());
    }
}

TEST_CASE("cell means converge") {
    auto w = builtin::world("independent2");
    const int n = 10000;
    auto d = sample_dataset(w, n, 6);
    std::map<AttributeVector, std::pair<Vec, int>> acc;
    for (const auto& it : d.items) {
        auto& [sum, count] = acc.try_emplace(it.pa, Vec::Zero(2), 0).first->second;
        sum += it.x0;
        ++count;
    }
    for (const auto& [pa, sc] : acc) {
        const Vec mean = sc.first / sc.second;
        const double band = 3.0 * w.sigma0() / std::sqrt(double(sc.second));
        CHECK((mean - w.mean(pa)).cwiseAbs().maxCoeff() < band);
    }
}

TEST_CASE("average posterior recovers the prior") {
    auto w = builtin::world("age_finding");
    auto d = sample_dataset(w, 10000, 7);
    for (int i = 0; i < w.attributes(); ++i) {
        double post = 0, freq = 0;
        for (const auto& it : d.items) {
            post += bayes_posterior(w, it.x0, i)[1] / d.size();
            freq += it.pa[static_cast<size_t>(i)] / double(d.size());
        }
        double prior = 0;
        for (const auto& c : w.components())
            if (c.pa[static_cast<size_t>(i)] == 1) prior += c.prior;
        CHECK(std::abs(post - prior) < 0.02);
        CHECK(std::abs(freq - prior) < 0.02);
    }
}

TEST_CASE("dataset csv columns") {
    auto w = builtin::world("age_finding");
    auto d = sample_dataset(w, 3, 8);
    std::ostringstream os;
    write_dataset_csv(os, w, d);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header.rfind("item_id,pa_age,pa_race,pa_sex,pa_finding,u_", 0) == 0);
    CHECK(header.find(",x_0") != std::string::npos);
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 3);
}
