#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "xlb/errors.hpp"
#include "xlb/scenario.hpp"
#include "xlb/synth.hpp"

using namespace xlb;

namespace {

ParallelCorpus corpus_of(std::size_t groups) {
    SynthConfig cfg;
    cfg.n_groups = groups;
    cfg.dim = 8;
    return gen_synthetic_corpus(cfg);
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("kind strings round-trip") {
    for (auto k : {ScenarioKind::Multi, ScenarioKind::Multi1, ScenarioKind::MonoSame,
                   ScenarioKind::MonoCross})
        CHECK(scenario_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(scenario_kind_from_string("dual"), InvalidConfig);
}

TEST_CASE("multi pools mix both languages with two golds") {
    ParallelCorpus c = corpus_of(10);
    ScenarioSpec spec{ScenarioKind::Multi, "en", {"en", "zh"}};
    auto instances = build_scenario(c, spec);
    REQUIRE(instances.size() == 10);

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        CHECK(inst.query_id == c.groups()[i] + "-en-q");
        CHECK(inst.pool.size() == 20);
        REQUIRE(inst.gold.size() == 2);
        CHECK(inst.gold[0] == inst.group + "-en-d");
        CHECK(inst.gold[1] == inst.group + "-zh-d");
        for (const auto& g : inst.gold)
            CHECK(std::find(inst.pool.begin(), inst.pool.end(), g) != inst.pool.end());
    }
}

TEST_CASE("multi1 removes exactly the same-language gold") {
    ParallelCorpus c = corpus_of(10);
    for (const std::string& qlang : {std::string("en"), std::string("zh")}) {
        ScenarioSpec multi{ScenarioKind::Multi, qlang, {"en", "zh"}};
        ScenarioSpec multi1{ScenarioKind::Multi1, qlang, {"en", "zh"}};
        auto mi = build_scenario(c, multi);
        auto m1 = build_scenario(c, multi1);
        REQUIRE(mi.size() == m1.size());

        const std::string other = qlang == "en" ? "zh" : "en";
        for (std::size_t i = 0; i < mi.size(); ++i) {
            CHECK(m1[i].query_id == mi[i].query_id);
            REQUIRE(m1[i].gold.size() == 1);
            CHECK(m1[i].gold[0] == mi[i].group + "-" + other + "-d");

            std::set<std::string> expect(mi[i].pool.begin(), mi[i].pool.end());
            expect.erase(mi[i].group + "-" + qlang + "-d");
            std::set<std::string> got(m1[i].pool.begin(), m1[i].pool.end());
            CHECK(got == expect);
            CHECK(m1[i].pool.size() == mi[i].pool.size() - 1);
        }
    }
}

TEST_CASE("mono pools stay within one language") {
    ParallelCorpus c = corpus_of(6);

    ScenarioSpec same{ScenarioKind::MonoSame, "zh", {"zh"}};
    for (const auto& inst : build_scenario(c, same)) {
        CHECK(inst.pool.size() == 6);
        for (const auto& id : inst.pool) CHECK(id.find("-zh-d") != std::string::npos);
        REQUIRE(inst.gold.size() == 1);
        CHECK(inst.gold[0] == inst.group + "-zh-d");
    }

    ScenarioSpec cross{ScenarioKind::MonoCross, "zh", {"en"}};
    for (const auto& inst : build_scenario(c, cross)) {
        CHECK(inst.pool.size() == 6);
        for (const auto& id : inst.pool) CHECK(id.find("-en-d") != std::string::npos);
        REQUIRE(inst.gold.size() == 1);
        CHECK(inst.gold[0] == inst.group + "-en-d");
    }
}

TEST_CASE("structural validation rejects malformed specs") {
    ParallelCorpus c = corpus_of(3);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::Multi, "fr", {"en", "zh"}}, c),
                    LanguageNotInCorpus);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::Multi, "en", {"en", "fr"}}, c),
                    LanguageNotInCorpus);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::Multi, "en", {"en"}}, c),
                    InvalidConfig);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::Multi1, "en", {"zh", "zh"}}, c),
                    InvalidConfig);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::MonoSame, "en", {"zh"}}, c),
                    InvalidConfig);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::MonoCross, "en", {"en"}}, c),
                    InvalidConfig);
    CHECK_NOTHROW(validate_scenario({ScenarioKind::Multi, "zh", {"zh", "en"}}, c));
    CHECK_NOTHROW(validate_scenario({ScenarioKind::MonoCross, "zh", {"en"}}, c));

    SynthConfig tri;
    tri.n_groups = 2;
    tri.dim = 8;
    tri.languages = {"en", "zh", "fr"};
    ParallelCorpus c3 = gen_synthetic_corpus(tri);
    CHECK_THROWS_AS(validate_scenario({ScenarioKind::Multi, "fr", {"en", "zh"}}, c3),
                    InvalidConfig);
}

TEST_CASE("instances follow normalized group order") {
    ParallelCorpus c = corpus_of(7);
    auto instances = build_scenario(c, {ScenarioKind::MonoSame, "en", {"en"}});
    for (std::size_t i = 1; i < instances.size(); ++i)
        CHECK(instances[i - 1].group < instances[i].group);
}

}  // TEST_SUITE
