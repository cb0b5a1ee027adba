#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "xlb/errors.hpp"
#include "xlb/metrics.hpp"

using namespace xlb;

namespace {

Ranking ranking_of(const std::vector<std::string>& ids) {
    Ranking r;
    r.query_id = "q";
    double score = 1.0;
    for (const auto& id : ids) {
        r.entries.push_back({id, score});
        score -= 0.001;
    }
    return r;
}

// One instance whose single gold sits at `gold_rank` in a pool of `n`.
std::pair<EvalInstance, Ranking> instance_with_gold_at(std::size_t n, std::size_t gold_rank,
                                                       const std::string& qid) {
    std::vector<std::string> ids;
    for (std::size_t i = 1; i <= n; ++i) ids.push_back("d" + std::to_string(i));
    Ranking r = ranking_of(ids);
    r.query_id = qid;
    EvalInstance inst;
    inst.query_id = qid;
    inst.group = "g";
    inst.pool = ids;
    inst.gold = {ids[gold_rank - 1]};
    return {inst, r};
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("rank_of finds 1-based positions") {
    Ranking r = ranking_of({"a", "b", "c"});
    CHECK(rank_of(r, "a") == 1);
    CHECK(rank_of(r, "c") == 3);
    CHECK_THROWS_AS(rank_of(r, "zz"), GoldNotInRanking);
}

TEST_CASE("max_at_r takes the worst gold rank") {
    Ranking r = ranking_of({"a", "b", "c", "d"});
    CHECK(max_at_r(r, {"a"}) == 1);
    CHECK(max_at_r(r, {"a", "d"}) == 4);
    CHECK(max_at_r(r, {"c", "b"}) == 3);
    CHECK_THROWS_AS(max_at_r(r, {}), DomainError);
}

TEST_CASE("max_at_r_norm boundaries and hand value") {
    CHECK(max_at_r_norm(10, 2, 2) == 100.0);
    CHECK(max_at_r_norm(10, 2, 10) == 0.0);
    // 100 * (log2 1024 - log2 32) / (log2 1024 - log2 2) = 500/9
    CHECK(max_at_r_norm(1024, 2, 32) == doctest::Approx(55.5556).epsilon(1e-5));
    CHECK_THROWS_AS(max_at_r_norm(8, 8, 8), DomainError);

    double prev = 101.0;
    for (std::size_t r = 2; r <= 64; ++r) {
        double v = max_at_r_norm(64, 2, r);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("complete_at_k agrees with the rank cutoff") {
    Ranking r = ranking_of({"a", "b", "c", "d", "e"});
    CHECK(complete_at_k(r, {"a", "c"}, 2) == 0);
    CHECK(complete_at_k(r, {"a", "c"}, 3) == 1);

    std::mt19937 gen(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + gen() % 30;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back("d" + std::to_string(i));
        std::shuffle(ids.begin(), ids.end(), gen);
        Ranking rr = ranking_of(ids);
        std::vector<std::string> gold = {ids[gen() % n]};
        if (gen() % 2) {
            std::string second = ids[gen() % n];
            if (second != gold[0]) gold.push_back(second);
        }
        std::size_t worst = max_at_r(rr, gold);
        for (std::size_t k = 1; k <= n; ++k)
            CHECK(complete_at_k(rr, gold, k) == (worst <= k ? 1 : 0));
    }
}

TEST_CASE("ndcg_at_1 is the binary top-hit indicator") {
    Ranking r = ranking_of({"a", "b", "c"});
    CHECK(ndcg_at_1(r, {"a"}) == 1);
    CHECK(ndcg_at_1(r, {"b"}) == 0);
    CHECK_THROWS_AS(ndcg_at_1(r, {"a", "b"}), MultiGoldUnsupported);
}

TEST_CASE("reciprocal_rank inverts the gold rank") {
    Ranking r = ranking_of({"a", "b", "c", "d"});
    CHECK(reciprocal_rank(r, {"a"}) == 1.0);
    CHECK(reciprocal_rank(r, {"d"}) == 0.25);
    CHECK_THROWS_AS(reciprocal_rank(r, {"a", "b"}), MultiGoldUnsupported);
}

TEST_CASE("evaluate_instances aggregates hand-checkable means") {
    // Two single-gold queries with gold ranks 1 and 2 in pools of 4.
    auto [i1, r1] = instance_with_gold_at(4, 1, "q1");
    auto [i2, r2] = instance_with_gold_at(4, 2, "q2");
    ScenarioSpec spec{ScenarioKind::MonoSame, "en", {"en"}};

    MetricReport rep = evaluate_instances({i1, i2}, {r1, r2}, spec, {1, 2}, true);
    CHECK(rep.n_queries == 2);
    CHECK(rep.max_at_r_mean == doctest::Approx(1.5));
    // norm(4,1,1) = 100, norm(4,1,2) = 50
    CHECK(rep.max_at_r_norm_mean == doctest::Approx(75.0));
    CHECK(rep.complete_at_k_pct.at(1) == doctest::Approx(50.0));
    CHECK(rep.complete_at_k_pct.at(2) == doctest::Approx(100.0));
    REQUIRE(rep.ndcg_at_1_mean.has_value());
    CHECK(*rep.ndcg_at_1_mean == doctest::Approx(0.5));
    REQUIRE(rep.mrr.has_value());
    CHECK(*rep.mrr == doctest::Approx(0.75));  // (1 + 1/2) / 2

    REQUIRE(rep.per_query.size() == 2);
    CHECK(rep.per_query[0].query_id == "q1");
    CHECK(rep.per_query[1].max_at_r == 2);

    // Multi-gold instances suppress the single-gold metrics.
    EvalInstance two = i1;
    two.gold = {"d1", "d3"};
    MetricReport multi = evaluate_instances({two}, {r1}, spec, {1}, false);
    CHECK_FALSE(multi.ndcg_at_1_mean.has_value());
    CHECK_FALSE(multi.mrr.has_value());
    CHECK(multi.per_query.empty());
}

TEST_CASE("language_gap subtracts aggregates, a from b") {
    auto [i1, r1] = instance_with_gold_at(4, 1, "q-en");
    auto [i2, r2] = instance_with_gold_at(4, 2, "q-zh");
    MetricReport en = evaluate_instances({i1}, {r1}, {ScenarioKind::MonoSame, "en", {"en"}},
                                         {1}, false);
    MetricReport zh = evaluate_instances({i2}, {r2}, {ScenarioKind::MonoSame, "zh", {"zh"}},
                                         {1}, false);
    // Doc languages differ between MonoSame reports; align them for the gap.
    zh.scenario.doc_langs = en.scenario.doc_langs;

    auto gaps = language_gap(en, zh);
    REQUIRE(!gaps.empty());
    bool saw_max = false, saw_c1 = false;
    for (const auto& g : gaps) {
        CHECK(g.delta == doctest::Approx(g.value_a - g.value_b));
        if (g.metric == "max_at_r_mean") {
            CHECK(g.delta == doctest::Approx(-1.0));
            saw_max = true;
        }
        if (g.metric == "complete_at_1") {
            CHECK(g.delta == doctest::Approx(100.0));
            saw_c1 = true;
        }
    }
    CHECK(saw_max);
    CHECK(saw_c1);

    // A report against itself is a valid all-zero table.
    for (const auto& g : language_gap(en, en)) CHECK(g.delta == 0.0);

    MetricReport other = en;
    other.scenario.kind = ScenarioKind::Multi1;
    CHECK_THROWS_AS(language_gap(en, other), IncompatibleReports);
    MetricReport coarse = zh;
    coarse.k_values = {1, 5};
    CHECK_THROWS_AS(language_gap(en, coarse), IncompatibleReports);
}

TEST_CASE("report round-trips through JSON byte-identically") {
    TempDir tmp;
    auto [i1, r1] = instance_with_gold_at(6, 3, "q1");
    auto [i2, r2] = instance_with_gold_at(6, 1, "q2");
    MetricReport rep = evaluate_instances({i1, i2}, {r1, r2},
                                          {ScenarioKind::MonoSame, "en", {"en"}},
                                          {1, 5, 10}, true);
    save_report(rep, tmp / "a.json");
    MetricReport back = load_report(tmp / "a.json");
    save_report(back, tmp / "b.json");
    CHECK(slurp(tmp / "a.json") == slurp(tmp / "b.json"));

    CHECK(back.n_queries == rep.n_queries);
    CHECK(back.scenario.kind == rep.scenario.kind);
    CHECK(back.scenario.query_lang == rep.scenario.query_lang);
    CHECK(back.k_values == rep.k_values);
    CHECK(back.max_at_r_mean == rep.max_at_r_mean);
    CHECK(back.max_at_r_norm_mean == rep.max_at_r_norm_mean);
    CHECK(back.complete_at_k_pct == rep.complete_at_k_pct);
    CHECK(back.per_query.size() == rep.per_query.size());
}

TEST_CASE("csv and table renderings carry the aggregates") {
    auto [i1, r1] = instance_with_gold_at(4, 2, "q1");
    MetricReport rep = evaluate_instances({i1}, {r1},
                                          {ScenarioKind::MonoSame, "en", {"en"}}, {1}, false);
    std::string csv = report_to_csv(rep);
    CHECK(csv.rfind("metric,value\n", 0) == 0);
    CHECK(csv.find("max_at_r_mean,2") != std::string::npos);
    CHECK(csv.find("complete_at_1,0") != std::string::npos);

    std::string table = report_to_table(rep);
    CHECK(table.find("mono-same") != std::string::npos);

    auto gaps = language_gap(rep, rep);
    std::string gcsv = gaps_to_csv(rep, rep, gaps);
    CHECK(gcsv.rfind("metric,en,en,gap\n", 0) == 0);
}

}  // TEST_SUITE
