// Command-line front end. All behaviour lives in the library; this file only
// parses flags, loads the run config and prints summaries.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"
#include "xlb/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config, "run config JSON")->required();
    cmd->add_option("-o,--out", args.out, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "override every seed in the config");
}

xlb::RunConfig resolve(const CommonArgs& args) {
    xlb::RunConfig cfg = xlb::load_run_config(args.config);
    if (!args.out.empty()) cfg.output_dir = args.out;
    if (args.seed) xlb::apply_seed_override(cfg, *args.seed);
    return cfg;
}

void print_report_line(const xlb::MetricReport& r) {
    std::printf("%-11s q=%-3s n=%-5zu max@R %.4f  max@R_norm %.2f",
                xlb::to_string(r.scenario.kind), r.scenario.query_lang.c_str(),
                r.n_queries, r.max_at_r_mean, r.max_at_r_norm_mean);
    for (auto k : r.k_values)
        std::printf("  C@%zu %.2f", k, r.complete_at_k_pct.at(k));
    if (r.mrr) std::printf("  MRR %.4f", *r.mrr);
    std::printf("\n");
}

int run(int argc, char** argv) {
    CLI::App app{"cross-lingual retrieval benchmark and alignment trainer"};
    app.require_subcommand(1);

    CommonArgs gen_args, eval_args, train_args, ablate_args;
    auto* gen = app.add_subcommand("gen-synth", "write synthetic corpus, embeddings, triplets");
    add_common(gen, gen_args);
    auto* ev = app.add_subcommand("eval", "rank scenario pools and write metric reports");
    add_common(ev, eval_args);
    auto* tr = app.add_subcommand("train", "fit a linear adapter, write adapter and loss log");
    add_common(tr, train_args);
    auto* ab = app.add_subcommand("ablate", "train each loss arm and evaluate all of them");
    add_common(ab, ablate_args);

    std::string cmp_a, cmp_b, cmp_out = "out";
    auto* cmp = app.add_subcommand("compare", "language gaps between two metric reports");
    cmp->add_option("-a", cmp_a, "first report JSON")->required();
    cmp->add_option("-b", cmp_b, "second report JSON")->required();
    cmp->add_option("-o,--out", cmp_out, "output directory");

    uint64_t gc_seed = 42;
    std::size_t gc_batches = 20, gc_batch = 4, gc_dim = 8;
    double gc_h = 1e-5;
    auto* gc = app.add_subcommand("grad-check",
                                  "finite-difference check of every loss gradient");
    gc->add_option("--seed", gc_seed, "base seed");
    gc->add_option("--batches", gc_batches, "random batches per mode");
    gc->add_option("--batch-size", gc_batch, "triplets per batch");
    gc->add_option("--dim", gc_dim, "embedding dimension");
    gc->add_option("--step", gc_h, "finite difference step");

    std::string rep_path;
    auto* rep = app.add_subcommand("report", "pretty-print a stored metric report");
    rep->add_option("file", rep_path, "report JSON")->required();

    CLI11_PARSE(app, argc, argv);

    if (*gen) {
        auto res = xlb::cmd_gen_synth(resolve(gen_args));
        std::printf("corpus      %s\n", res.corpus.c_str());
        std::printf("embeddings  %s\n", res.embeddings.c_str());
        std::printf("triplets    %s\n", res.triplets.c_str());
    } else if (*ev) {
        for (const auto& r : xlb::cmd_eval(resolve(eval_args))) print_report_line(r);
    } else if (*tr) {
        auto res = xlb::cmd_train(resolve(train_args));
        if (!res.log.empty()) {
            const auto& last = res.log.back();
            std::printf("steps %zu  final l_jsd %.6f  l_nce %.6f  total %.6f\n",
                        res.log.size(), last.l_jsd, last.l_nce, last.total);
        }
    } else if (*ab) {
        for (const auto& [arm, reports] : xlb::cmd_ablate(resolve(ablate_args))) {
            std::printf("[%s]\n", arm.c_str());
            for (const auto& r : reports) print_report_line(r);
        }
    } else if (*cmp) {
        for (const auto& g : xlb::cmd_compare(cmp_a, cmp_b, cmp_out))
            std::printf("%-20s a %.4f  b %.4f  delta %+.4f\n", g.metric.c_str(),
                        g.value_a, g.value_b, g.delta);
    } else if (*gc) {
        auto res = xlb::cmd_grad_check(gc_seed, gc_batches, gc_batch, gc_dim, gc_h);
        bool ok = true;
        for (const auto& [mode, err] : res) {
            std::printf("%-10s max rel err %.3e\n", mode.c_str(), err);
            if (!(err < 1e-4)) ok = false;
        }
        return ok ? 0 : 1;
    } else if (*rep) {
        std::fputs(xlb::report_to_table(xlb::load_report(rep_path)).c_str(), stdout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const xlb::Error& e) {
        nlohmann::json j{{"error", e.kind()}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json j{{"error", "Unhandled"}, {"message", e.what()}};
        std::cerr << j.dump() << "\n";
        return 2;
    }
}
