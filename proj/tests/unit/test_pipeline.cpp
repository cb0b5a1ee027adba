#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "xlb/errors.hpp"
#include "xlb/pipeline.hpp"

using namespace xlb;

namespace {

// Small config with a synthetic corpus; keeps pipeline tests subsecond.
std::string small_config(const std::filesystem::path& out, const std::string& extra = "") {
    return std::string(R"({
      "output_dir": ")") + out.string() + R"(",
      "synth": {"n_groups": 12, "dim": 8, "triplets": 6},
      "train": {"batch_size": 4, "epochs": 1},
      "scenarios": [
        {"kind": "multi", "query_lang": "en", "doc_langs": ["en", "zh"], "k": [1, 5, 10]},
        {"kind": "multi", "query_lang": "zh", "doc_langs": ["en", "zh"], "k": [1, 5, 10]}
      ])" + extra + "\n}";
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("defaults survive an empty config") {
    RunConfig cfg = parse_run_config("{}");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.threads == 0);
    CHECK_FALSE(cfg.corpus_path.has_value());
    CHECK(cfg.synth.n_groups == 500);
    CHECK(cfg.synth_triplets == 400);
    CHECK(cfg.synth_target_lang == "zh");
    CHECK(cfg.scenarios.empty());
    CHECK(cfg.train.mode == LossMode::Combined);
    CHECK(cfg.report.csv);
    CHECK_FALSE(cfg.report.per_query);
}

TEST_CASE("sections parse into the right fields") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(small_config(tmp.path));
    CHECK(cfg.synth.n_groups == 12);
    CHECK(cfg.synth.dim == 8);
    CHECK(cfg.synth_triplets == 6);
    CHECK(cfg.train.batch_size == 4);
    REQUIRE(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[0].spec.kind == ScenarioKind::Multi);
    CHECK(cfg.scenarios[1].spec.query_lang == "zh");
    CHECK(cfg.scenarios[0].k_values == std::vector<std::size_t>{1, 5, 10});
}

TEST_CASE("unknown and mistyped keys are rejected by name") {
    try {
        parse_run_config(R"({"synth": {"bogus": 1}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("synth.bogus") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_run_config(R"({"synth": {"dim": "eight"}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"typo": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"scenarios": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"scenarios": [{"query_lang": "en"}]})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("not json"), ConfigError);
    // Invalid numeric ranges surface as config errors too.
    CHECK_THROWS_AS(parse_run_config(R"({"synth": {"alpha": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"train": {"lr": 0}})"), ConfigError);
}

TEST_CASE("seed override reaches synthesis and training") {
    RunConfig cfg = parse_run_config("{}");
    apply_seed_override(cfg, 777);
    CHECK(cfg.synth.seed == 777);
    CHECK(cfg.train.seed == 777);

    RunConfig via_json = parse_run_config(R"({"seed": 9})");
    CHECK(via_json.synth.seed == 9);
    CHECK(via_json.train.seed == 9);
}

TEST_CASE("thread resolution prefers the environment") {
    RunConfig cfg = parse_run_config(R"({"threads": 2})");
    unsetenv("XLB_THREADS");
    CHECK(resolve_threads(cfg) == 2);
    setenv("XLB_THREADS", "5", 1);
    CHECK(resolve_threads(cfg) == 5);
    setenv("XLB_THREADS", "abc", 1);
    CHECK_THROWS_AS(resolve_threads(cfg), ConfigError);
    unsetenv("XLB_THREADS");
}

TEST_CASE("gen-synth writes a loadable corpus, embeddings and triplets") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(small_config(tmp.path));
    GenSynthResult r = cmd_gen_synth(cfg);
    CHECK(load_corpus(r.corpus).groups().size() == 12);
    EmbeddingMatrix emb = load_embeddings(r.embeddings);
    CHECK(emb.rows() == 12 * 2 * 2);
    CHECK(emb.dim() == 8);
    CHECK(load_triplets(r.triplets).size() == 6);
}

TEST_CASE("eval writes one report per scenario and leaves inputs untouched") {
    TempDir tmp;
    RunConfig gen = parse_run_config(small_config(tmp.path / "gen"));
    GenSynthResult files = cmd_gen_synth(gen);
    std::string corpus_before = slurp(files.corpus);
    std::string emb_before = slurp(files.embeddings);

    std::string cfg_json = std::string(R"({
      "output_dir": ")") + (tmp.path / "eval").string() + R"(",
      "corpus": {"path": ")" + files.corpus.string() + R"("},
      "embeddings": {"path": ")" + files.embeddings.string() + R"("},
      "scenarios": [
        {"kind": "multi", "query_lang": "en", "doc_langs": ["en", "zh"], "k": [1, 10]},
        {"kind": "mono-cross", "query_lang": "zh", "doc_langs": ["en"], "k": [1, 10]}
      ],
      "report": {"per_query": true, "dump_rankings": true}
    })";
    auto reports = cmd_eval(parse_run_config(cfg_json));
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].n_queries == 12);
    CHECK(reports[1].scenario.kind == ScenarioKind::MonoCross);
    CHECK_FALSE(reports[0].per_query.empty());

    auto dir = tmp.path / "eval";
    CHECK(std::filesystem::exists(dir / "report.multi.en.json"));
    CHECK(std::filesystem::exists(dir / "report.multi.en.csv"));
    CHECK(std::filesystem::exists(dir / "report.mono-cross.zh.json"));
    CHECK(std::filesystem::exists(dir / "rankings.multi.en.jsonl"));

    MetricReport back = load_report(dir / "report.multi.en.json");
    CHECK(back.max_at_r_mean == reports[0].max_at_r_mean);

    CHECK(slurp(files.corpus) == corpus_before);
    CHECK(slurp(files.embeddings) == emb_before);

    RunConfig no_scenarios = parse_run_config(R"({"synth": {"n_groups": 2, "dim": 8}})");
    CHECK_THROWS_AS(cmd_eval(no_scenarios), ConfigError);
}

TEST_CASE("perfectly aligned synthetic corpus retrieves completely") {
    TempDir tmp;
    std::string cfg_json = std::string(R"({
      "output_dir": ")") + tmp.path.string() + R"(",
      "synth": {"n_groups": 20, "dim": 16, "alpha": 1.0, "bias_strength": 0.0,
                "noise_sigma": 0.0},
      "scenarios": [
        {"kind": "multi", "query_lang": "en", "doc_langs": ["en", "zh"], "k": [10]},
        {"kind": "multi", "query_lang": "zh", "doc_langs": ["en", "zh"], "k": [10]}
      ]
    })";
    auto reports = cmd_eval(parse_run_config(cfg_json));
    for (const auto& rep : reports) {
        CHECK(rep.complete_at_k_pct.at(10) == 100.0);
        CHECK(rep.max_at_r_mean == 2.0);
    }
}

TEST_CASE("train emits an adapter checkpoint and a loss log") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(small_config(tmp.path));
    TrainResult r = cmd_train(cfg);
    CHECK(std::filesystem::exists(tmp / "adapter.xlad"));
    CHECK(std::filesystem::exists(tmp / "losses.csv"));

    AdapterParams back = load_adapter(tmp / "adapter.xlad");
    CHECK(back.W == r.adapter.W);

    std::string csv = slurp(tmp / "losses.csv");
    CHECK(csv.rfind("step,lr,l_jsd,l_nce,total\n", 0) == 0);
    // 6 triplets, batch 4: two steps.
    CHECK(r.log.size() == 2);

    RunConfig again = parse_run_config(small_config(tmp.path / "again"));
    TrainResult r2 = cmd_train(again);
    CHECK(r2.adapter.W == r.adapter.W);
    CHECK(slurp(tmp / "adapter.xlad") == slurp(tmp.path / "again" / "adapter.xlad"));
}

TEST_CASE("ablate produces the base arm plus four trained arms") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(small_config(tmp.path));
    auto arms = cmd_ablate(cfg);
    REQUIRE(arms.size() == 5);
    for (const char* arm : {"base", "jsd_only", "nce_only", "nce_psg", "combined"}) {
        REQUIRE(arms.count(arm) == 1);
        CHECK(arms.at(arm).size() == 2);
        auto dir = tmp.path / "ablate" / arm;
        CHECK(std::filesystem::exists(dir / "adapter.xlad"));
        CHECK(std::filesystem::exists(dir / "report.multi.zh.json"));
        CHECK(std::filesystem::exists(dir / "losses.csv") == (std::string(arm) != "base"));
    }
    AdapterParams base = load_adapter(tmp.path / "ablate" / "base" / "adapter.xlad");
    CHECK(base.W == AdapterParams::identity(8).W);
}

TEST_CASE("compare writes a gap table") {
    TempDir tmp;
    RunConfig cfg = parse_run_config(small_config(tmp.path));
    cmd_eval(cfg);

    auto gaps = cmd_compare(tmp / "report.multi.en.json", tmp / "report.multi.zh.json",
                            tmp / "cmp");
    REQUIRE(!gaps.empty());
    CHECK(std::filesystem::exists(tmp.path / "cmp" / "compare.csv"));

    auto self = cmd_compare(tmp / "report.multi.en.json", tmp / "report.multi.en.json",
                            tmp / "self");
    for (const auto& g : self) CHECK(g.delta == 0.0);
}

TEST_CASE("grad-check reports sub-tolerance errors for every mode") {
    auto worst = cmd_grad_check(42, 3, 3, 6);
    REQUIRE(worst.size() == 4);
    for (const auto& [mode, err] : worst) {
        INFO(mode);
        CHECK(err < 1e-4);
    }
}

TEST_CASE("losses_to_csv renders the schedule log") {
    std::vector<StepLog> log = {{1, 0.5, 0.25, 0.125, 0.375}};
    std::string csv = losses_to_csv(log);
    CHECK(csv.rfind("step,lr,l_jsd,l_nce,total\n", 0) == 0);
    CHECK(csv.find("\n1,0.5,0.25,0.125,0.375\n") != std::string::npos);
}

TEST_CASE("adapter hooks into eval when configured") {
    TempDir tmp;
    RunConfig train_cfg = parse_run_config(small_config(tmp.path / "t"));
    cmd_train(train_cfg);

    std::string with_adapter = std::string(R"({
      "output_dir": ")") + (tmp.path / "e").string() + R"(",
      "adapter": ")" + (tmp.path / "t" / "adapter.xlad").string() + R"(",
      "synth": {"n_groups": 12, "dim": 8},
      "scenarios": [{"kind": "multi", "query_lang": "zh", "doc_langs": ["en", "zh"],
                     "k": [10]}]
    })";
    auto adapted = cmd_eval(parse_run_config(with_adapter));

    std::string plain = std::string(R"({
      "output_dir": ")") + (tmp.path / "p").string() + R"(",
      "synth": {"n_groups": 12, "dim": 8},
      "scenarios": [{"kind": "multi", "query_lang": "zh", "doc_langs": ["en", "zh"],
                     "k": [10]}]
    })";
    auto base = cmd_eval(parse_run_config(plain));
    // The trained adapter must actually change the ranking geometry.
    CHECK(adapted[0].max_at_r_mean != base[0].max_at_r_mean);
}

}  // TEST_SUITE
