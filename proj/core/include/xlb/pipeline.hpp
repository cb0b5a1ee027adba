#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlb/align.hpp"
#include "xlb/corpus.hpp"
#include "xlb/embedding.hpp"
#include "xlb/metrics.hpp"
#include "xlb/scenario.hpp"
#include "xlb/synth.hpp"

namespace xlb {

// A run is described by one JSON config; command-line flags only pick the
// subcommand, point at files and optionally override the seed.
struct ScenarioRequest {
    ScenarioSpec spec;
    std::vector<std::size_t> k_values = {1, 5, 10};
};

struct ReportOptions {
    bool per_query = false;
    bool csv = true;
    bool dump_rankings = false;
};

struct RunConfig {
    std::filesystem::path output_dir = "out";
    unsigned threads = 0;  // 0 = auto; the XLB_THREADS env var wins when set

    std::optional<std::filesystem::path> corpus_path;  // unset: synthesize
    std::optional<std::filesystem::path> embeddings_path;
    std::optional<std::filesystem::path> adapter_path;  // eval applies it

    SynthConfig synth;
    std::size_t synth_triplets = 400;
    std::string synth_target_lang = "zh";

    std::vector<ScenarioRequest> scenarios;

    std::optional<std::filesystem::path> triplets_path;
    TrainConfig train;

    ReportOptions report;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Applies --seed to every seeded stage (synthesis and training).
void apply_seed_override(RunConfig& cfg, uint64_t seed);

// Worker thread resolution: XLB_THREADS if set (0 = auto), else the config.
unsigned resolve_threads(const RunConfig& cfg);

// gen-synth: corpus.jsonl + embeddings.xleb + triplets.jsonl in output_dir.
struct GenSynthResult {
    std::filesystem::path corpus;
    std::filesystem::path embeddings;
    std::filesystem::path triplets;
};
GenSynthResult cmd_gen_synth(const RunConfig& cfg);

// eval: one report per scenario request, written as
// report.<kind>.<query_lang>.json (plus .csv / rankings.jsonl when asked).
std::vector<MetricReport> cmd_eval(const RunConfig& cfg);

// train: adapter.xlad + losses.csv in output_dir.
TrainResult cmd_train(const RunConfig& cfg);

// ablate: per arm (base, jsd_only, nce_only, nce_psg, combined) a directory
// ablate/<arm>/ holding adapter.xlad, losses.csv and the scenario reports.
std::map<std::string, std::vector<MetricReport>> cmd_ablate(const RunConfig& cfg);

// compare: gap table between two stored reports, written to compare.csv.
std::vector<GapEntry> cmd_compare(const std::filesystem::path& report_a,
                                  const std::filesystem::path& report_b,
                                  const std::filesystem::path& output_dir);

// grad-check: per loss mode the scaled max deviation between analytic and
// central-difference gradients on `batches` random batches.
std::map<std::string, double> cmd_grad_check(uint64_t seed, std::size_t batches = 20,
                                             std::size_t batch_size = 4,
                                             std::size_t dim = 8, double h = 1e-5);

// Serialized losses.csv body (step,lr,l_jsd,l_nce,total).
std::string losses_to_csv(const std::vector<StepLog>& log);

// Mean JSD between adapter outputs of parallel (p_en, p_tgt) document pairs
// over every group; the JsdOnly training target, used by ablation checks.
double mean_parallel_jsd(const ParallelCorpus& corpus, const EmbeddingMatrix& base,
                         const AdapterParams& adapter, const std::string& target_lang,
                         double eps = 0.0);

// Mean cosine between adapted (q_en, p_tgt) pairs over every group.
double mean_query_target_cosine(const ParallelCorpus& corpus, const EmbeddingMatrix& base,
                                const AdapterParams& adapter,
                                const std::string& target_lang);

}  // namespace xlb
