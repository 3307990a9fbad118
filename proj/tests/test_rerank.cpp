// Copyright (C) 2026 The keyreid Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "keyreid/error.hpp"
#include "keyreid/flow.hpp"
#include "keyreid/oracle.hpp"
#include "keyreid/rerank.hpp"
#include "keyreid/saliency.hpp"
#include "keyreid/synth.hpp"
#include "support.hpp"

using namespace keyreid;

namespace {

KeySet keys_of(std::vector<KeyEntry> entries) {
    KeySet k;
    k.keys = std::move(entries);
    return k;
}

FeatureSpace one_dim(const std::string& name, const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
    FeatureSpace s;
    s.name = name;
    s.dim = 1;
    for (const auto& [id, x] : a) s.embeddings["A"][id] = {x};
    for (const auto& [id, x] : b) s.embeddings["B"][id] = {x};
    return s;
}

std::vector<std::string> ids_of(const std::vector<RankedCandidate>& r) {
    std::vector<std::string> out;
    for (const auto& c : r) out.push_back(c.id);
    return out;
}

/// Random keys drawn from the probe flow, each with a random feature.
KeySet random_keys(std::mt19937_64& gen, const FlowSet& probe, const FeatureBank& bank, std::size_t count) {
    auto ids = probe.ids();
    std::shuffle(ids.begin(), ids.end(), gen);
    std::vector<KeyEntry> entries;
    std::uniform_real_distribution<double> score(0.5, 1.0);
    for (std::size_t i = 0; i < count && i < ids.size(); ++i) {
        entries.push_back({ids[i], bank.spaces[gen() % bank.spaces.size()].name, score(gen)});
    }
    return keys_of(entries);
}

}  // namespace

TEST_CASE("nearest key persons by temporal gap") {
    const FlowSet flow("A", {{"k1", "A", 10, {}, {}}, {"q", "A", 30, {}, {}}, {"k2", "A", 100, {}, {}}});
    const auto keys = keys_of({{"k1", "F", 1.0}, {"k2", "F", 1.0}});
    const auto one = nearest_key_persons("q", flow, keys, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].id == "k1");
    CHECK(nearest_key_persons("q", flow, keys, 4).size() == 2);
    CHECK(nearest_key_persons("q", flow, {}, 4).empty());

    const auto self = nearest_key_persons("k2", flow, keys, 1);
    CHECK(self[0].id == "k2");
}

TEST_CASE("nearest key ties break by earlier frame, then id") {
    const FlowSet flow("A", {{"e", "A", 0, {}, {}}, {"d", "A", 20, {}, {}}, {"c", "A", 20, {}, {}},
                             {"q", "A", 10, {}, {}}});
    const auto keys = keys_of({{"d", "F", 1}, {"c", "F", 1}, {"e", "F", 1}});
    const auto order = nearest_key_persons("q", flow, keys, 3);
    CHECK(order[0].id == "e");
    CHECK(order[1].id == "c");
    CHECK(order[2].id == "d");
}

TEST_CASE("nearest keys stay inside the query's velocity subset") {
    const FlowSet raw("A", {{"q", "A", 50, {1, 0}, {}}, {"near", "A", 51, {-1, 0}, {}}, {"far", "A", 90, {1, 0}, {}}});
    const auto flow = split_by_velocity(raw, 45, 1);
    const auto keys = keys_of({{"near", "F", 1}, {"far", "F", 1}});
    const auto got = nearest_key_persons("q", flow, keys, 1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].id == "far");
}

TEST_CASE("key matching normalizes by the row maximum") {
    FeatureBank bank;
    bank.spaces.push_back(one_dim("F", {{"k", 0.0}}, {{"g1", 2.0}, {"g2", 8.0}, {"g3", 10.0}}));
    bank.baseline = "F";
    const FlowSet gallery("B", {{"g1", "B", 100, {}, {}}, {"g2", "B", 200, {}, {}}, {"g3", "B", 300, {}, {}}});
    const auto anchor = match_key_person("k", "F", "A", gallery, bank);
    CHECK(anchor.top_match_id == "g1");
    CHECK(anchor.top_match_time == 100);
    CHECK(anchor.d_key == doctest::Approx(0.2));

    FeatureBank zero;
    zero.spaces.push_back(one_dim("F", {{"k", 1.0}}, {{"g1", 1.0}, {"g2", 1.0}, {"g3", 1.0}}));
    zero.baseline = "F";
    CHECK(match_key_person("k", "F", "A", gallery, zero).d_key == 1.0);

    FeatureBank single;
    single.spaces.push_back(one_dim("F", {{"k", 0.0}}, {{"g1", 3.0}}));
    single.baseline = "F";
    const FlowSet one("B", {{"g1", "B", 5, {}, {}}});
    const auto a1 = match_key_person("k", "F", "A", one, single);
    CHECK(a1.d_key == 1.0);
    CHECK(a1.top_match_id == "g1");

    FeatureBank exact;
    exact.spaces.push_back(one_dim("F", {{"k", 2.0}}, {{"g1", 2.0}, {"g2", 8.0}, {"g3", 10.0}}));
    exact.baseline = "F";
    const double d = match_key_person("k", "F", "A", gallery, exact).d_key;
    CHECK(d > 0.0);
    CHECK(d == kMinKeyWeight);

    CHECK_THROWS_AS(match_key_person("missing", "F", "A", gallery, bank), ValidationError);
}

TEST_CASE("candidate window endpoints and membership") {
    const FlowSet gallery("B", {{"g1", "B", 140, {}, {}}, {"g2", "B", 146, {}, {}}, {"g3", "B", 150, {}, {}},
                                {"g4", "B", 156, {}, {}}, {"g5", "B", 45, {}, {}}, {"g6", "B", 100, {}, {}}});
    KeyAnchor anchor;
    anchor.top_match_time = 100;
    anchor.delta_t = 50;
    const auto w = candidate_window(anchor, gallery, 0.1);
    CHECK(w.lo == doctest::Approx(145));
    CHECK(w.hi == doctest::Approx(155));
    CHECK(w.member_ids == std::vector<std::string>{"g2", "g3"});
    for (const auto& id : w.member_ids) {
        CHECK(double(gallery.at(id).entering_frame) >= w.lo);
        CHECK(double(gallery.at(id).entering_frame) <= w.hi);
    }

    anchor.delta_t = -50;
    const auto neg = candidate_window(anchor, gallery, 0.1);
    CHECK(neg.lo == doctest::Approx(45));
    CHECK(neg.hi == doctest::Approx(55));
    CHECK(neg.member_ids == std::vector<std::string>{"g5"});

    anchor.delta_t = 0;
    const auto point = candidate_window(anchor, gallery, 0.0);
    CHECK(point.member_ids == std::vector<std::string>{"g6"});
    CHECK_THROWS_AS(candidate_window(anchor, gallery, -1.0), ParameterError);
}

TEST_CASE("weights per candidate") {
    const std::vector<std::string> ids = {"g1", "g2", "g3"};
    CandidateWindow w1, w2;
    w1.anchor.d_key = 0.3;
    w1.member_ids = {"g1", "g2"};
    w2.anchor.d_key = 0.5;
    w2.member_ids = {"g2"};
    const std::vector<CandidateWindow> ws = {w1, w2};
    const auto min = compute_weights(ws, ids, WeightCombine::min);
    CHECK(min == std::vector<double>{0.3, 0.3, 1.0});
    CHECK(compute_weights(ws, ids, WeightCombine::max)[1] == 0.5);
    CHECK(compute_weights(ws, ids, WeightCombine::product)[1] == doctest::Approx(0.15));

    CandidateWindow all;
    all.anchor.d_key = 0.25;
    all.member_ids = ids;
    const std::vector<CandidateWindow> one = {all};
    CHECK(compute_weights(one, ids, WeightCombine::min) == std::vector<double>{0.25, 0.25, 0.25});
    CHECK(compute_weights({}, ids, WeightCombine::min) == std::vector<double>{1, 1, 1});
}

TEST_CASE("reranked scores and ordering") {
    const std::vector<double> base = {0.5, 0.4, 0.8};
    const std::vector<double> w = {1, 1, 0.25};
    const auto d = rerank_scores(base, w);
    CHECK(d[0] == 0.5);
    CHECK(d[1] == 0.4);
    CHECK(d[2] == doctest::Approx(0.2));
    const std::vector<std::string> ids = {"x", "y", "z"};
    CHECK(ids_of(rank_by_score(ids, d)) == std::vector<std::string>{"z", "y", "x"});
    const std::vector<double> ones = {1, 1, 1};
    CHECK(rerank_scores(base, ones) == base);
    const std::vector<double> two = {1, 1};
    CHECK_THROWS_AS(rerank_scores(base, two), ParameterError);

    const std::vector<double> tied = {0.3, 0.3, 0.1};
    const std::vector<std::string> tid = {"b", "a", "c"};
    CHECK(ids_of(rank_by_score(tid, tied)) == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("hand-built three-person example") {
    FeatureBank bank;
    bank.spaces.push_back(
        one_dim("F", {{"a", 0.0}, {"b", 5.0}, {"c", 10.0}}, {{"x", 0.1}, {"y", 5.2}, {"z", 10.3}}));
    bank.baseline = "F";
    bank.baseline_matrix = ScoreMatrix({"a", "b", "c"}, {"x", "y", "z"},
                                       {0.5, 0.4, 0.8, 0.6, 0.2, 0.9, 0.7, 0.6, 0.1});
    const FlowSet probe("A", {{"a", "A", 0, {}, "x"}, {"b", "A", 10, {}, "y"}, {"c", "A", 20, {}, "z"}});
    const FlowSet gallery("B", {{"x", "B", 100, {}, "a"}, {"y", "B", 110, {}, "b"}, {"z", "B", 120, {}, "c"}});
    const auto keys = keys_of({{"c", "F", 1.0}});
    PipelineConfig config;
    config.tau = 0.3;
    config.num_keys = 1;

    // key c matches z (distance 0.3 of row max 9.9); delta T = -20, window [94, 106] holds x only.
    const auto out = rerank_query_explained("a", probe, gallery, bank, keys, config);
    REQUIRE(out.windows.size() == 1);
    CHECK(out.windows[0].anchor.top_match_id == "z");
    CHECK(out.windows[0].anchor.d_key == doctest::Approx(0.3 / 9.9));
    CHECK(out.windows[0].lo == doctest::Approx(94));
    CHECK(out.windows[0].hi == doctest::Approx(106));
    CHECK(out.windows[0].member_ids == std::vector<std::string>{"x"});
    CHECK(ids_of(out.ranking) == std::vector<std::string>{"x", "y", "z"});
    CHECK(out.ranking[0].score == doctest::Approx(0.5 * 0.3 / 9.9));
    CHECK(ids_of(baseline_ranking("a", probe, gallery, bank, config)) == std::vector<std::string>{"y", "x", "z"});
    CHECK(oracle_rerank("a", probe, gallery, bank, keys, config) == out.ranking);
}

TEST_CASE("no key persons: reranking equals the baseline") {
    std::mt19937_64 gen(21);
    for (int round = 0; round < 10; ++round) {
        const auto inst = test::random_instance(gen, {.n = 25});
        PipelineConfig config;
        config.rho_per_feature = {{"F0", 1.01}, {"F1", 1.01}};
        const auto keys = union_key_sets(inst.bank, inst.probe, config);
        REQUIRE(keys.empty());
        for (const auto& q : inst.probe.ids()) {
            CHECK(rerank_query(q, inst.probe, inst.gallery, inst.bank, keys, config) ==
                  baseline_ranking(q, inst.probe, inst.gallery, inst.bank, config));
        }
    }
}

TEST_CASE("reranking properties on random instances") {
    std::mt19937_64 gen(2024);
    for (int round = 0; round < 40; ++round) {
        const bool split = round % 2 == 0;
        auto inst = test::random_instance(gen, {.n = 10 + gen() % 30, .two_directions = split,
                                                .with_matrix = round % 3 == 0});
        if (split) {
            inst.probe = split_by_velocity(inst.probe, 45, 1);
            inst.gallery = split_by_velocity(inst.gallery, 45, 1);
        }
        PipelineConfig config;
        config.tau = 0.3;
        config.num_keys = 1 + gen() % 4;
        const auto keys = random_keys(gen, inst.probe, inst.bank, gen() % 8);
        const Reranker reranker(inst.probe, inst.gallery, inst.bank, keys, config);
        for (const auto& q : inst.probe.ids()) {
            const auto explained = rerank_query_explained(q, inst.probe, inst.gallery, inst.bank, keys, config);
            const auto base = baseline_row(q, inst.probe, inst.gallery, inst.bank, config);
            const auto ids = inst.gallery.ids();

            // the precomputing reranker gives the same answer
            const auto fast = reranker.rerank(q);
            REQUIRE(fast.ranking == explained.ranking);
            REQUIRE(fast.weights == explained.weights);

            std::map<std::string, double> score;
            for (const auto& c : explained.ranking) score[c.id] = c.score;
            for (std::size_t j = 0; j < ids.size(); ++j) {
                // discount only
                CHECK(score[ids[j]] <= base[j]);
                CHECK(explained.weights[j] > 0.0);
                CHECK(explained.weights[j] <= 1.0);
            }
            // equal weights keep their baseline order
            for (std::size_t i = 0; i < ids.size(); ++i) {
                for (std::size_t j = 0; j < ids.size(); ++j) {
                    if (explained.weights[i] != explained.weights[j]) continue;
                    if (base[i] < base[j]) CHECK(score[ids[i]] <= score[ids[j]]);
                }
            }
            for (const auto& w : explained.windows) {
                CHECK(w.anchor.d_key > 0.0);
                CHECK(w.anchor.d_key <= 1.0);
                for (const auto& id : w.member_ids) {
                    const double t = double(inst.gallery.at(id).entering_frame);
                    CHECK(t >= w.lo);
                    CHECK(t <= w.hi);
                }
            }
        }
    }
}

TEST_CASE("a single window over the whole gallery leaves the ranking unchanged") {
    std::mt19937_64 gen(77);
    for (int round = 0; round < 10; ++round) {
        const auto inst = test::random_instance(gen, {.n = 20});
        PipelineConfig config;
        config.num_keys = 1;
        config.tau = 1000.0;  // window spans every entering frame
        const auto keys = random_keys(gen, inst.probe, inst.bank, 1);
        for (const auto& q : inst.probe.ids()) {
            const auto out = rerank_query_explained(q, inst.probe, inst.gallery, inst.bank, keys, config);
            const auto& k = inst.probe.at(keys.keys[0].id);
            if (k.entering_frame == inst.probe.at(q).entering_frame) continue;  // point window
            REQUIRE(out.windows[0].member_ids.size() == inst.gallery.size());
            CHECK(ids_of(out.ranking) == ids_of(baseline_ranking(q, inst.probe, inst.gallery, inst.bank, config)));
        }
    }
}

TEST_CASE("scaling the baseline distances leaves the ranking unchanged") {
    std::mt19937_64 gen(8);
    for (int round = 0; round < 10; ++round) {
        auto inst = test::random_instance(gen, {.n = 20, .with_matrix = true});
        PipelineConfig config;
        const auto keys = random_keys(gen, inst.probe, inst.bank, 5);
        FeatureBank scaled = inst.bank;
        std::vector<double> v = scaled.baseline_matrix->values();
        for (auto& x : v) x *= 4.0;  // a power of two keeps every product exact
        scaled.baseline_matrix = ScoreMatrix(inst.bank.baseline_matrix->probe_ids(),
                                             inst.bank.baseline_matrix->gallery_ids(), v);
        for (const auto& q : inst.probe.ids()) {
            CHECK(ids_of(rerank_query(q, inst.probe, inst.gallery, inst.bank, keys, config)) ==
                  ids_of(rerank_query(q, inst.probe, inst.gallery, scaled, keys, config)));
        }
    }
}

TEST_CASE("rerank_query agrees with the straight-line transcription") {
    std::mt19937_64 gen(4242);
    const std::size_t key_counts[] = {1, 2, 4};
    const double taus[] = {0.0, 0.1, 0.3};
    int instances = 0;
    for (std::size_t l : key_counts) {
        for (double tau : taus) {
            for (int round = 0; round < 4; ++round) {
                const bool split = round % 2 == 1;
                auto inst = test::random_instance(
                    gen, {.n = 5 + gen() % 45, .two_directions = split, .with_matrix = round == 2, .max_gap = 5});
                if (split) {
                    inst.probe = split_by_velocity(inst.probe, 45, 1);
                    inst.gallery = split_by_velocity(inst.gallery, 45, 1);
                }
                PipelineConfig config;
                config.num_keys = l;
                config.tau = tau;
                config.weight_combine = static_cast<WeightCombine>(gen() % 3);
                const auto keys = round == 3 ? KeySet{} : random_keys(gen, inst.probe, inst.bank, 1 + gen() % 10);
                for (const auto& q : inst.probe.ids()) {
                    REQUIRE(rerank_query(q, inst.probe, inst.gallery, inst.bank, keys, config) ==
                            oracle_rerank(q, inst.probe, inst.gallery, inst.bank, keys, config));
                }
                ++instances;
            }
        }
    }
    CHECK(instances == 36);
}

TEST_CASE("true matches never lose rank when every key is matched correctly") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SynthParams p;
        p.num_identities = 80;
        p.seed = seed;
        p.transit_jitter = 0.0;
        p.cross_view_noise = 0.05;
        const auto flow = generate_flow(p);
        PipelineConfig config;
        const FlowSet probe = split_by_velocity(flow.probe, config.angle_threshold, config.speed_tolerance);
        const FlowSet gallery = split_by_velocity(flow.gallery, config.angle_threshold, config.speed_tolerance);
        const auto keys = union_key_sets(flow.bank, probe, config);
        REQUIRE_FALSE(keys.empty());
        for (const auto& q : probe.members()) {
            const auto out = rerank_query_explained(q.id, probe, gallery, flow.bank, keys, config);
            for (const auto& w : out.windows) REQUIRE(w.anchor.top_match_id == flow.truth.at(w.anchor.key_id));
            const auto base = baseline_ranking(q.id, probe, gallery, flow.bank, config);
            std::size_t before = 0, after = 0;
            for (std::size_t r = 0; r < base.size(); ++r) {
                if (base[r].id == *q.true_match) before = r;
                if (out.ranking[r].id == *q.true_match) after = r;
            }
            CHECK(after <= before);
        }
    }
}
