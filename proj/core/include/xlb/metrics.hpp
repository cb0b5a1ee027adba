#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlb/retrieval.hpp"
#include "xlb/scenario.hpp"

namespace xlb {

// 1-based rank of doc_id in the full ordering; GoldNotInRanking if absent.
std::size_t rank_of(const Ranking& ranking, const std::string& doc_id);

// Worst (maximum) 1-based rank over the gold set.
std::size_t max_at_r(const Ranking& ranking, const std::vector<std::string>& gold);

// 100 * (log2(pool) - log2(max_rank)) / (log2(pool) - log2(n_gold)).
// 100 when the golds fill the top |R| ranks, 0 when the worst gold is last.
// n_gold == pool has no normalization scale and raises DomainError.
double max_at_r_norm(std::size_t pool_size, std::size_t n_gold, std::size_t max_rank);

// 1 if every gold doc ranks within the top k, else 0.
int complete_at_k(const Ranking& ranking, const std::vector<std::string>& gold,
                  std::size_t k);

// Binary single-gold NDCG at cutoff 1; MultiGoldUnsupported for |gold| != 1.
int ndcg_at_1(const Ranking& ranking, const std::vector<std::string>& gold);

// 1 / rank(gold); single gold only.
double reciprocal_rank(const Ranking& ranking, const std::vector<std::string>& gold);

struct QueryMetrics {
    std::string query_id;
    std::size_t max_at_r = 0;
    double max_at_r_norm = 0.0;
    std::map<std::size_t, int> complete_at_k;
    std::optional<int> ndcg_at_1;    // single-gold instances only
    std::optional<double> rr;        // single-gold instances only
};

struct MetricReport {
    ScenarioSpec scenario;
    std::size_t n_queries = 0;
    std::vector<std::size_t> k_values;
    double max_at_r_mean = 0.0;
    double max_at_r_norm_mean = 0.0;                 // 0..100
    std::map<std::size_t, double> complete_at_k_pct; // 0..100 per k
    std::optional<double> ndcg_at_1_mean;            // 0..1
    std::optional<double> mrr;                       // 0..1
    std::vector<QueryMetrics> per_query;
};

// Rankings and instances must be parallel (same order). Every mean is the
// arithmetic mean over exactly n_queries values; NDCG@1 and MRR appear only
// when every instance carries a single gold.
MetricReport evaluate_instances(const std::vector<EvalInstance>& instances,
                                const std::vector<Ranking>& rankings,
                                const ScenarioSpec& spec,
                                const std::vector<std::size_t>& k_values,
                                bool keep_per_query = false);

struct GapEntry {
    std::string metric;
    double value_a = 0.0;
    double value_b = 0.0;
    double delta = 0.0;  // value_a - value_b, native units
};

// Signed aggregate differences between two reports of the same scenario
// shape, typically evaluated for different query languages (a report minus
// itself is a valid all-zero table). IncompatibleReports when kinds, doc
// languages or K grids disagree.
std::vector<GapEntry> language_gap(const MetricReport& a, const MetricReport& b);

void save_report(const MetricReport& report, const std::filesystem::path& path);
MetricReport load_report(const std::filesystem::path& path);

std::string report_to_csv(const MetricReport& report);
std::string report_to_table(const MetricReport& report);
std::string gaps_to_csv(const MetricReport& a, const MetricReport& b,
                        const std::vector<GapEntry>& gaps);

}  // namespace xlb
