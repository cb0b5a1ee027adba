#include "xlb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"

namespace xlb {

std::size_t rank_of(const Ranking& ranking, const std::string& doc_id) {
    for (std::size_t i = 0; i < ranking.entries.size(); ++i)
        if (ranking.entries[i].doc_id == doc_id) return i + 1;
    throw GoldNotInRanking("gold document '" + doc_id + "' not present in ranking for query '" +
                           ranking.query_id + "'");
}

std::size_t max_at_r(const Ranking& ranking, const std::vector<std::string>& gold) {
    if (gold.empty()) throw DomainError("max_at_r needs a non-empty gold set");
    std::size_t worst = 0;
    for (const auto& g : gold) worst = std::max(worst, rank_of(ranking, g));
    return worst;
}

double max_at_r_norm(std::size_t pool_size, std::size_t n_gold, std::size_t max_rank) {
    if (n_gold == 0) throw DomainError("max_at_r_norm needs n_gold >= 1");
    if (pool_size < n_gold) throw DomainError("pool smaller than gold set");
    if (max_rank < n_gold || max_rank > pool_size)
        throw DomainError("max rank " + std::to_string(max_rank) + " outside [" +
                          std::to_string(n_gold) + ", " + std::to_string(pool_size) + "]");
    if (n_gold == pool_size)
        throw DomainError("normalization undefined when the gold set fills the pool");
    double ld = std::log2(static_cast<double>(pool_size));
    double lr = std::log2(static_cast<double>(n_gold));
    double lm = std::log2(static_cast<double>(max_rank));
    return 100.0 * (ld - lm) / (ld - lr);
}

int complete_at_k(const Ranking& ranking, const std::vector<std::string>& gold,
                  std::size_t k) {
    if (k == 0) throw DomainError("complete_at_k needs k >= 1");
    return max_at_r(ranking, gold) <= k ? 1 : 0;
}

int ndcg_at_1(const Ranking& ranking, const std::vector<std::string>& gold) {
    if (gold.size() != 1)
        throw MultiGoldUnsupported("ndcg_at_1 is defined for single-gold instances only");
    return rank_of(ranking, gold[0]) == 1 ? 1 : 0;
}

double reciprocal_rank(const Ranking& ranking, const std::vector<std::string>& gold) {
    if (gold.size() != 1)
        throw MultiGoldUnsupported("reciprocal rank is defined for single-gold instances only");
    return 1.0 / static_cast<double>(rank_of(ranking, gold[0]));
}

MetricReport evaluate_instances(const std::vector<EvalInstance>& instances,
                                const std::vector<Ranking>& rankings,
                                const ScenarioSpec& spec,
                                const std::vector<std::size_t>& k_values,
                                bool keep_per_query) {
    if (instances.empty()) throw DomainError("cannot evaluate zero instances");
    if (instances.size() != rankings.size())
        throw DomainError("instances and rankings differ in length");

    bool all_single_gold = std::all_of(instances.begin(), instances.end(),
                                       [](const EvalInstance& i) { return i.gold.size() == 1; });

    MetricReport rep;
    rep.scenario = spec;
    rep.n_queries = instances.size();
    rep.k_values = k_values;

    double sum_max = 0.0, sum_norm = 0.0, sum_ndcg = 0.0, sum_rr = 0.0;
    std::map<std::size_t, double> sum_complete;
    for (std::size_t k : k_values) sum_complete[k] = 0.0;

    for (std::size_t i = 0; i < instances.size(); ++i) {
        const EvalInstance& inst = instances[i];
        const Ranking& rk = rankings[i];
        if (rk.query_id != inst.query_id)
            throw DomainError("ranking order does not match instance order at index " +
                              std::to_string(i));

        QueryMetrics qm;
        qm.query_id = inst.query_id;
        qm.max_at_r = max_at_r(rk, inst.gold);
        qm.max_at_r_norm = max_at_r_norm(inst.pool.size(), inst.gold.size(), qm.max_at_r);
        for (std::size_t k : k_values)
            qm.complete_at_k[k] = qm.max_at_r <= k ? 1 : 0;
        if (all_single_gold) {
            qm.ndcg_at_1 = ndcg_at_1(rk, inst.gold);
            qm.rr = reciprocal_rank(rk, inst.gold);
            sum_ndcg += *qm.ndcg_at_1;
            sum_rr += *qm.rr;
        }

        sum_max += static_cast<double>(qm.max_at_r);
        sum_norm += qm.max_at_r_norm;
        for (std::size_t k : k_values) sum_complete[k] += qm.complete_at_k[k];
        if (keep_per_query) rep.per_query.push_back(std::move(qm));
    }

    double n = static_cast<double>(rep.n_queries);
    rep.max_at_r_mean = sum_max / n;
    rep.max_at_r_norm_mean = sum_norm / n;
    for (std::size_t k : k_values) rep.complete_at_k_pct[k] = 100.0 * sum_complete[k] / n;
    if (all_single_gold) {
        rep.ndcg_at_1_mean = sum_ndcg / n;
        rep.mrr = sum_rr / n;
    }
    return rep;
}

std::vector<GapEntry> language_gap(const MetricReport& a, const MetricReport& b) {
    if (a.scenario.kind != b.scenario.kind)
        throw IncompatibleReports("scenario kinds differ");
    if (a.k_values != b.k_values) throw IncompatibleReports("K grids differ");
    // Multi/Multi1 doc languages are a set; order-insensitive comparison.
    auto sorted = [](std::vector<std::string> v) { std::sort(v.begin(), v.end()); return v; };
    if (sorted(a.scenario.doc_langs) != sorted(b.scenario.doc_langs))
        throw IncompatibleReports("document languages differ");

    std::vector<GapEntry> gaps;
    auto push = [&](const std::string& name, double va, double vb) {
        gaps.push_back({name, va, vb, va - vb});
    };
    push("max_at_r_mean", a.max_at_r_mean, b.max_at_r_mean);
    push("max_at_r_norm_mean", a.max_at_r_norm_mean, b.max_at_r_norm_mean);
    for (std::size_t k : a.k_values)
        push("complete_at_" + std::to_string(k),
             a.complete_at_k_pct.at(k), b.complete_at_k_pct.at(k));
    if (a.ndcg_at_1_mean && b.ndcg_at_1_mean)
        push("ndcg_at_1_mean", *a.ndcg_at_1_mean, *b.ndcg_at_1_mean);
    if (a.mrr && b.mrr) push("mrr", *a.mrr, *b.mrr);
    return gaps;
}

namespace {

nlohmann::ordered_json report_json(const MetricReport& rep) {
    nlohmann::ordered_json j;
    j["scenario"] = {{"kind", to_string(rep.scenario.kind)},
                     {"query_lang", rep.scenario.query_lang},
                     {"doc_langs", rep.scenario.doc_langs}};
    j["n_queries"] = rep.n_queries;
    j["k_values"] = rep.k_values;
    nlohmann::ordered_json m;
    m["max_at_r_mean"] = rep.max_at_r_mean;
    m["max_at_r_norm_mean"] = rep.max_at_r_norm_mean;
    nlohmann::ordered_json ck;
    for (const auto& [k, pct] : rep.complete_at_k_pct) ck[std::to_string(k)] = pct;
    m["complete_at_k_pct"] = std::move(ck);
    m["ndcg_at_1_mean"] =
        rep.ndcg_at_1_mean ? nlohmann::ordered_json(*rep.ndcg_at_1_mean) : nullptr;
    m["mrr"] = rep.mrr ? nlohmann::ordered_json(*rep.mrr) : nullptr;
    j["metrics"] = std::move(m);
    if (!rep.per_query.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& q : rep.per_query) {
            nlohmann::ordered_json e;
            e["query_id"] = q.query_id;
            e["max_at_r"] = q.max_at_r;
            e["max_at_r_norm"] = q.max_at_r_norm;
            nlohmann::ordered_json c;
            for (const auto& [k, v] : q.complete_at_k) c[std::to_string(k)] = v;
            e["complete_at_k"] = std::move(c);
            e["ndcg_at_1"] = q.ndcg_at_1 ? nlohmann::ordered_json(*q.ndcg_at_1) : nullptr;
            e["rr"] = q.rr ? nlohmann::ordered_json(*q.rr) : nullptr;
            arr.push_back(std::move(e));
        }
        j["per_query"] = std::move(arr);
    }
    return j;
}

}  // namespace

void save_report(const MetricReport& rep, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << report_json(rep).dump(2) << '\n';
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

MetricReport load_report(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    nlohmann::json j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded()) throw FormatError("'" + path.string() + "' is not valid JSON");

    try {
        MetricReport rep;
        rep.scenario.kind = scenario_kind_from_string(j.at("scenario").at("kind"));
        rep.scenario.query_lang = j.at("scenario").at("query_lang");
        rep.scenario.doc_langs =
            j.at("scenario").at("doc_langs").get<std::vector<std::string>>();
        rep.n_queries = j.at("n_queries");
        rep.k_values = j.at("k_values").get<std::vector<std::size_t>>();
        const auto& m = j.at("metrics");
        rep.max_at_r_mean = m.at("max_at_r_mean");
        rep.max_at_r_norm_mean = m.at("max_at_r_norm_mean");
        for (const auto& [k, v] : m.at("complete_at_k_pct").items())
            rep.complete_at_k_pct[std::stoull(k)] = v.get<double>();
        if (!m.at("ndcg_at_1_mean").is_null())
            rep.ndcg_at_1_mean = m.at("ndcg_at_1_mean").get<double>();
        if (!m.at("mrr").is_null()) rep.mrr = m.at("mrr").get<double>();
        if (j.contains("per_query")) {
            for (const auto& e : j.at("per_query")) {
                QueryMetrics q;
                q.query_id = e.at("query_id");
                q.max_at_r = e.at("max_at_r");
                q.max_at_r_norm = e.at("max_at_r_norm");
                for (const auto& [k, v] : e.at("complete_at_k").items())
                    q.complete_at_k[std::stoull(k)] = v.get<int>();
                if (!e.at("ndcg_at_1").is_null()) q.ndcg_at_1 = e.at("ndcg_at_1").get<int>();
                if (!e.at("rr").is_null()) q.rr = e.at("rr").get<double>();
                rep.per_query.push_back(std::move(q));
            }
        }
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("malformed report '" + path.string() + "': " + e.what());
    }
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    return os.str();
}

}  // namespace

std::string report_to_csv(const MetricReport& rep) {
    std::ostringstream os;
    os << "metric,value\n";
    os << "n_queries," << rep.n_queries << '\n';
    os << "max_at_r_mean," << fmt(rep.max_at_r_mean) << '\n';
    os << "max_at_r_norm_mean," << fmt(rep.max_at_r_norm_mean) << '\n';
    for (const auto& [k, pct] : rep.complete_at_k_pct)
        os << "complete_at_" << k << ',' << fmt(pct) << '\n';
    if (rep.ndcg_at_1_mean) os << "ndcg_at_1_mean," << fmt(*rep.ndcg_at_1_mean) << '\n';
    if (rep.mrr) os << "mrr," << fmt(*rep.mrr) << '\n';
    return os.str();
}

std::string report_to_table(const MetricReport& rep) {
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("queries", std::to_string(rep.n_queries));
    rows.emplace_back("Max@R (mean)", fmt(rep.max_at_r_mean));
    rows.emplace_back("Max@R_norm (mean)", fmt(rep.max_at_r_norm_mean));
    for (const auto& [k, pct] : rep.complete_at_k_pct)
        rows.emplace_back("Complete@" + std::to_string(k) + " (%)", fmt(pct));
    if (rep.ndcg_at_1_mean) rows.emplace_back("NDCG@1 (mean)", fmt(*rep.ndcg_at_1_mean));
    if (rep.mrr) rows.emplace_back("MRR", fmt(*rep.mrr));

    std::size_t w = 0;
    for (const auto& [k, _] : rows) w = std::max(w, k.size());
    std::ostringstream os;
    os << to_string(rep.scenario.kind) << " / query_lang=" << rep.scenario.query_lang << '\n';
    for (const auto& [k, v] : rows)
        os << "  " << k << std::string(w - k.size() + 2, ' ') << v << '\n';
    return os.str();
}

std::string gaps_to_csv(const MetricReport& a, const MetricReport& b,
                        const std::vector<GapEntry>& gaps) {
    std::ostringstream os;
    os << "metric," << a.scenario.query_lang << ',' << b.scenario.query_lang << ",gap\n";
    for (const auto& g : gaps)
        os << g.metric << ',' << fmt(g.value_a) << ',' << fmt(g.value_b) << ','
           << fmt(g.delta) << '\n';
    return os.str();
}

}  // namespace xlb
