// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <set>

#include "keyreid/error.hpp"
#include "keyreid/flow.hpp"
#include "support.hpp"

using namespace keyreid;

namespace {

FlowSet flow_with_velocities(const std::string& camera, const std::vector<Vec2>& velocities) {
    std::vector<PedestrianRecord> records;
    for (std::size_t i = 0; i < velocities.size(); ++i) {
        records.push_back({test::id_of(camera == "A" ? 'a' : 'b', i), camera, std::int64_t(i * 3 % 7), velocities[i], {}});
    }
    return build_flow(std::move(records), camera);
}

}  // namespace

TEST_CASE("build_flow orders by entering frame") {
    const auto flow = build_flow({{"x", "A", 30, {}, {}}, {"y", "A", 10, {}, {}}, {"z", "A", 20, {}, {}}}, "A");
    CHECK(flow.ids() == std::vector<std::string>{"y", "z", "x"});
    const auto tie = build_flow({{"x", "A", 5, {}, {}}, {"y", "A", 5, {}, {}}}, "A");
    CHECK(tie.ids() == std::vector<std::string>{"x", "y"});
    CHECK(build_flow({}, "A").empty());
    CHECK_THROWS_AS(build_flow({{"x", "A", 1, {}, {}}, {"x", "A", 1, {}, {}}}, "A"), InputError);
}

TEST_CASE("temporal distance is signed and antisymmetric") {
    const auto flow = build_flow({{"a", "A", 30, {}, {}}, {"b", "A", 10, {}, {}}}, "A");
    CHECK(temporal_distance(flow, "a", "b") == 20);
    CHECK(temporal_distance(flow, "b", "a") == -20);
    CHECK(temporal_distance(flow, "a", "a") == 0);
    CHECK_THROWS_AS(temporal_distance(flow, "a", "zzz"), NotFoundError);
}

TEST_CASE("velocities in one direction form one subset") {
    const auto flow = flow_with_velocities("A", {{1, 0}, {1.1, 0.05}, {0.9, -0.1}, {1, 0.02}});
    const auto split = split_by_velocity(flow, 45.0, 1.0);
    REQUIRE(split.subsets().size() == 1);
    CHECK(split.subsets()[0].member_ids.size() == 4);
    CHECK(split.subsets()[0].label == "S0");
    CHECK(split.subsets()[0].main_velocity == Vec2{1.1, 0.05});
}

TEST_CASE("opposite directions split into two subsets of five") {
    std::vector<Vec2> v;
    for (int i = 0; i < 5; ++i) v.push_back({1, 0});
    for (int i = 0; i < 5; ++i) v.push_back({-1, 0});
    const auto split = split_by_velocity(flow_with_velocities("A", v), 45.0, 100.0);
    REQUIRE(split.subsets().size() == 2);
    CHECK(split.subsets()[0].member_ids.size() == 5);
    CHECK(split.subsets()[1].member_ids.size() == 5);
}

TEST_CASE("speed tolerance separates fast and slow walkers") {
    const auto split = split_by_velocity(flow_with_velocities("A", {{3, 0}, {1, 0}, {2.9, 0}, {1.1, 0}}), 45.0, 0.5);
    REQUIRE(split.subsets().size() == 2);
    CHECK(split.subsets()[0].main_velocity == Vec2{3, 0});
    CHECK(split.subsets()[0].member_ids.size() == 2);
}

TEST_CASE("zero velocities go to a stationary subset") {
    const auto split = split_by_velocity(flow_with_velocities("A", {{0, 0}, {1, 0}, {0, 0}}), 45.0, 1.0);
    REQUIRE(split.subsets().size() == 2);
    CHECK(split.subsets()[1].stationary);
    CHECK(split.subsets()[1].label == "stationary");
    CHECK(split.subsets()[1].member_ids.size() == 2);
}

TEST_CASE("split is a partition that preserves flow order, deterministically") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
    std::uniform_real_distribution<double> speed(0.2, 2.0);
    for (int round = 0; round < 30; ++round) {
        std::vector<Vec2> v;
        for (int i = 0; i < 40; ++i) {
            const double a = angle(gen), s = speed(gen);
            v.push_back({s * std::cos(a), s * std::sin(a)});
        }
        const auto flow = flow_with_velocities("A", v);
        const double theta = 20.0 + double(round);
        const double eps = 0.1 * double(round % 7);
        const auto split = split_by_velocity(flow, theta, eps);
        CHECK(split == split_by_velocity(flow, theta, eps));

        std::multiset<std::string> seen;
        for (const auto& s : split.subsets()) {
            std::size_t last = 0;
            bool first = true;
            for (const auto& id : s.member_ids) {
                seen.insert(id);
                const std::size_t pos = flow.position(id);
                if (!first) CHECK(pos > last);
                last = pos;
                first = false;
                const Vec2& mv = flow.at(id).velocity;
                CHECK(std::abs(mv.norm() - s.main_velocity.norm()) <= eps);
                CHECK(angle_between_deg(mv, s.main_velocity) < theta + 1e-9);
            }
        }
        CHECK(seen.size() == flow.size());
        CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == flow.size());
    }
}

TEST_CASE("identical structures pair by identity") {
    const std::vector<Vec2> v = {{1, 0}, {1, 0}, {-1, 0}, {-1, 0}};
    const auto p = split_by_velocity(flow_with_velocities("A", v), 45, 1);
    const auto g = split_by_velocity(flow_with_velocities("B", v), 45, 1);
    const auto pairs = correspond_subsets(p, g, {});
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].gallery_subset == std::optional<std::size_t>(0));
    CHECK(pairs[1].gallery_subset == std::optional<std::size_t>(1));
}

TEST_CASE("negate pairs mirrored directions") {
    const auto p = split_by_velocity(flow_with_velocities("A", {{1.2, 0}, {1, 0}, {-1, 0}}), 45, 1);
    const auto g = split_by_velocity(flow_with_velocities("B", {{-1.2, 0}, {-1, 0}, {1, 0}}), 45, 1);
    const auto pairs = correspond_subsets(p, g, {DirectionMap::Mode::negate, {}});
    REQUIRE(pairs.size() == 2);
    // probe S0 walks +x; mirrored gallery S0 walks -x
    CHECK(p.subsets()[0].main_velocity.x > 0);
    CHECK(g.subsets()[*pairs[0].gallery_subset].main_velocity.x < 0);
    CHECK(g.subsets()[*pairs[1].gallery_subset].main_velocity.x > 0);
}

TEST_CASE("an unmatched probe subset is reported without a partner") {
    const auto p = split_by_velocity(flow_with_velocities("A", {{1, 0}, {-1, 0}}), 45, 1);
    const auto g = split_by_velocity(flow_with_velocities("B", {{1, 0}, {1, 0}}), 45, 1);
    const auto pairs = correspond_subsets(p, g, {});
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].gallery_subset.has_value());
    CHECK_FALSE(pairs[1].gallery_subset.has_value());
}

TEST_CASE("explicit direction table") {
    const auto p = split_by_velocity(flow_with_velocities("A", {{1, 0}, {-1, 0}}), 45, 1);
    const auto g = split_by_velocity(flow_with_velocities("B", {{1, 0}, {-1, 0}}), 45, 1);
    DirectionMap map{DirectionMap::Mode::table, {{"S0", "S1"}}};
    const auto pairs = correspond_subsets(p, g, map);
    CHECK(pairs[0].gallery_subset == std::optional<std::size_t>(1));
    CHECK_FALSE(pairs[1].gallery_subset.has_value());
    CHECK_THROWS_AS(correspond_subsets(p, g, {DirectionMap::Mode::table, {{"S0", "S9"}}}), ParameterError);
    CHECK_THROWS_AS(correspond_subsets(p, g, {DirectionMap::Mode::table, {{"S0", "S1"}, {"S1", "S1"}}}),
                    ParameterError);
    CHECK_THROWS_AS(correspond_subsets(flow_with_velocities("A", {{1, 0}}), g, {}), ParameterError);
}

TEST_CASE("restricting a flow keeps relative order and drops subsets") {
    const auto flow = split_by_velocity(flow_with_velocities("A", {{1, 0}, {-1, 0}, {1, 0}, {1, 0}}), 45, 1);
    const std::vector<std::string> keep = {"a003", "a000"};
    const auto sub = flow.restricted_to(keep);
    CHECK_FALSE(sub.has_subsets());
    REQUIRE(sub.size() == 2);
    CHECK(flow.position(sub.ids()[0]) < flow.position(sub.ids()[1]));
}
