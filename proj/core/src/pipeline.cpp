#include "xlb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"
#include "xlb/retrieval.hpp"
#include "xlb/rng.hpp"

namespace xlb {

namespace {

using nlohmann::json;

// Strict section reader: every key must be consumed exactly once.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object())
            throw ConfigError("config section '" + name_ + "' must be an object");
    }
    ~Section() = default;

    template <typename T>
    void get(const char* key, T& out) {
        if (auto it = j_.find(key); it != j_.end()) {
            try {
                out = it->get<T>();
            } catch (const json::exception&) {
                throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
            }
            seen_.push_back(key);
        }
    }
    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) {
        seen_.push_back(key);
        return j_.at(key);
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError("unknown config key '" + name_ + "." + it.key() + "'");
    }

private:
    const json& j_;
    std::string name_;
    std::vector<std::string> seen_;
};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << body;
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

ParallelCorpus pipeline_corpus(const RunConfig& cfg) {
    if (cfg.corpus_path) return load_corpus(*cfg.corpus_path);
    return gen_synthetic_corpus(cfg.synth);
}

EmbeddingMatrix pipeline_embeddings(const RunConfig& cfg, const ParallelCorpus& corpus) {
    EmbeddingMatrix base = cfg.embeddings_path ? load_embeddings(*cfg.embeddings_path)
                                               : embed_synthetic(corpus, cfg.synth);
    if (cfg.adapter_path) base = apply_adapter(base, load_adapter(*cfg.adapter_path));
    return base;
}

ScenarioSpec resolve_scenario(const ScenarioRequest& req, const ParallelCorpus& corpus) {
    ScenarioSpec spec = req.spec;
    if (spec.doc_langs.empty()) {
        switch (spec.kind) {
            case ScenarioKind::Multi:
            case ScenarioKind::Multi1:
                if (corpus.languages().size() != 2)
                    throw ConfigError("doc_langs can only be inferred for two-language corpora");
                spec.doc_langs = corpus.languages();
                break;
            case ScenarioKind::MonoSame:
                spec.doc_langs = {spec.query_lang};
                break;
            case ScenarioKind::MonoCross: {
                if (corpus.languages().size() != 2)
                    throw ConfigError("doc_langs can only be inferred for two-language corpora");
                for (const auto& l : corpus.languages())
                    if (l != spec.query_lang) spec.doc_langs = {l};
                break;
            }
        }
    }
    return spec;
}

std::vector<TrainTriplet> pipeline_triplets(const RunConfig& cfg,
                                            const ParallelCorpus& corpus) {
    if (cfg.triplets_path) return load_triplets(*cfg.triplets_path);
    return make_parallel_triplets(corpus, cfg.synth_triplets, cfg.synth_target_lang);
}

std::vector<MetricReport> eval_on(const RunConfig& cfg, const ParallelCorpus& corpus,
                                  const EmbeddingMatrix& base,
                                  const std::filesystem::path& dir) {
    if (cfg.scenarios.empty()) throw ConfigError("no scenarios configured");
    EmbeddingMatrix norm = l2_normalize(base);
    unsigned threads = resolve_threads(cfg);
    std::filesystem::create_directories(dir);

    std::vector<MetricReport> reports;
    for (const auto& req : cfg.scenarios) {
        ScenarioSpec spec = resolve_scenario(req, corpus);
        auto instances = build_scenario(corpus, spec);
        auto rankings = retrieve_all(instances, norm, threads);
        MetricReport rep = evaluate_instances(instances, rankings, spec, req.k_values,
                                              cfg.report.per_query);
        std::string stem =
            std::string("report.") + to_string(spec.kind) + "." + spec.query_lang;
        save_report(rep, dir / (stem + ".json"));
        if (cfg.report.csv) write_text(dir / (stem + ".csv"), report_to_csv(rep));
        if (cfg.report.dump_rankings) {
            std::string rname =
                std::string("rankings.") + to_string(spec.kind) + "." + spec.query_lang +
                ".jsonl";
            write_rankings(rankings, dir / rname);
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("run config is not valid JSON");

    RunConfig cfg;
    Section root(j, "config");

    std::string out_dir;
    root.get("output_dir", out_dir);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    root.get("threads", cfg.threads);

    if (root.has("corpus")) {
        Section s(root.raw("corpus"), "corpus");
        std::string p;
        s.get("path", p);
        s.finish();
        if (!p.empty()) cfg.corpus_path = p;
    }
    if (root.has("embeddings")) {
        Section s(root.raw("embeddings"), "embeddings");
        std::string p;
        s.get("path", p);
        s.finish();
        if (!p.empty()) cfg.embeddings_path = p;
    }
    if (root.has("adapter")) {
        std::string p;
        root.get("adapter", p);
        cfg.adapter_path = p;
    }

    if (root.has("synth")) {
        Section s(root.raw("synth"), "synth");
        s.get("seed", cfg.synth.seed);
        s.get("n_groups", cfg.synth.n_groups);
        s.get("languages", cfg.synth.languages);
        s.get("dim", cfg.synth.dim);
        s.get("alpha", cfg.synth.alpha);
        s.get("bias_strength", cfg.synth.bias_strength);
        s.get("noise_sigma", cfg.synth.noise_sigma);
        s.get("triplets", cfg.synth_triplets);
        s.get("target_lang", cfg.synth_target_lang);
        s.finish();
    }

    if (root.has("scenarios")) {
        const json& arr = root.raw("scenarios");
        if (!arr.is_array()) throw ConfigError("'scenarios' must be an array");
        for (const auto& e : arr) {
            Section s(e, "scenario");
            ScenarioRequest req;
            std::string kind;
            s.get("kind", kind);
            if (kind.empty()) throw ConfigError("scenario entry without 'kind'");
            try {
                req.spec.kind = scenario_kind_from_string(kind);
            } catch (const InvalidConfig& e2) {
                throw ConfigError(e2.what());
            }
            s.get("query_lang", req.spec.query_lang);
            if (req.spec.query_lang.empty())
                throw ConfigError("scenario entry without 'query_lang'");
            s.get("doc_langs", req.spec.doc_langs);
            s.get("k", req.k_values);
            s.finish();
            if (req.k_values.empty()) throw ConfigError("scenario K grid must be non-empty");
            cfg.scenarios.push_back(std::move(req));
        }
    }

    if (root.has("train")) {
        Section s(root.raw("train"), "train");
        std::string trip, mode;
        s.get("triplets", trip);
        if (!trip.empty()) cfg.triplets_path = trip;
        s.get("mode", mode);
        if (!mode.empty()) {
            try {
                cfg.train.mode = loss_mode_from_string(mode);
            } catch (const InvalidConfig& e2) {
                throw ConfigError(e2.what());
            }
        }
        s.get("lr", cfg.train.lr);
        s.get("batch_size", cfg.train.batch_size);
        s.get("epochs", cfg.train.epochs);
        s.get("warmup_ratio", cfg.train.warmup_ratio);
        s.get("beta1", cfg.train.beta1);
        s.get("beta2", cfg.train.beta2);
        s.get("weight_decay", cfg.train.weight_decay);
        s.get("adam_eps", cfg.train.adam_eps);
        s.get("eps_jsd", cfg.train.eps_jsd);
        s.get("temperature", cfg.train.temperature);
        s.get("symmetric_nce", cfg.train.symmetric_nce);
        s.get("weight_jsd", cfg.train.weight_jsd);
        s.get("weight_nce", cfg.train.weight_nce);
        s.get("seed", cfg.train.seed);
        s.finish();
    }

    if (root.has("report")) {
        Section s(root.raw("report"), "report");
        s.get("per_query", cfg.report.per_query);
        s.get("csv", cfg.report.csv);
        s.get("dump_rankings", cfg.report.dump_rankings);
        s.finish();
    }

    if (root.has("seed")) {
        uint64_t seed = 0;
        root.get("seed", seed);
        apply_seed_override(cfg, seed);
    }
    root.finish();

    try {
        cfg.synth.validate();
        cfg.train.validate();
    } catch (const InvalidConfig& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_run_config(ss.str());
}

void apply_seed_override(RunConfig& cfg, uint64_t seed) {
    cfg.synth.seed = seed;
    cfg.train.seed = seed;
}

unsigned resolve_threads(const RunConfig& cfg) {
    if (const char* env = std::getenv("XLB_THREADS")) {
        std::string s(env);
        if (!s.empty()) {
            char* end = nullptr;
            unsigned long v = std::strtoul(s.c_str(), &end, 10);
            if (end == nullptr || *end != '\0')
                throw ConfigError("XLB_THREADS must be a non-negative integer, got '" + s + "'");
            return static_cast<unsigned>(v);
        }
    }
    return cfg.threads;
}

GenSynthResult cmd_gen_synth(const RunConfig& cfg) {
    ParallelCorpus corpus = gen_synthetic_corpus(cfg.synth);
    EmbeddingMatrix emb = embed_synthetic(corpus, cfg.synth);
    std::filesystem::create_directories(cfg.output_dir);

    GenSynthResult res;
    res.corpus = cfg.output_dir / "corpus.jsonl";
    res.embeddings = cfg.output_dir / "embeddings.xleb";
    res.triplets = cfg.output_dir / "triplets.jsonl";
    save_corpus(corpus, res.corpus);
    save_embeddings(emb, res.embeddings);
    save_triplets(make_parallel_triplets(corpus, cfg.synth_triplets, cfg.synth_target_lang),
                  res.triplets);
    return res;
}

std::vector<MetricReport> cmd_eval(const RunConfig& cfg) {
    ParallelCorpus corpus = pipeline_corpus(cfg);
    EmbeddingMatrix base = pipeline_embeddings(cfg, corpus);
    return eval_on(cfg, corpus, base, cfg.output_dir);
}

TrainResult cmd_train(const RunConfig& cfg) {
    ParallelCorpus corpus = pipeline_corpus(cfg);
    EmbeddingMatrix base = pipeline_embeddings(cfg, corpus);
    TrainResult result = train_adapter(pipeline_triplets(cfg, corpus), base, cfg.train);

    std::filesystem::create_directories(cfg.output_dir);
    save_adapter(result.adapter, cfg.output_dir / "adapter.xlad");
    write_text(cfg.output_dir / "losses.csv", losses_to_csv(result.log));
    return result;
}

std::map<std::string, std::vector<MetricReport>> cmd_ablate(const RunConfig& cfg) {
    ParallelCorpus corpus = pipeline_corpus(cfg);
    EmbeddingMatrix base = pipeline_embeddings(cfg, corpus);
    auto triplets = pipeline_triplets(cfg, corpus);

    std::map<std::string, std::vector<MetricReport>> out;
    const LossMode trained_arms[] = {LossMode::JsdOnly, LossMode::NceOnly,
                                     LossMode::NcePsg, LossMode::Combined};

    auto run_arm = [&](const std::string& name, const AdapterParams& adapter,
                       const std::vector<StepLog>* log) {
        std::filesystem::path dir = cfg.output_dir / "ablate" / name;
        std::filesystem::create_directories(dir);
        save_adapter(adapter, dir / "adapter.xlad");
        if (log) write_text(dir / "losses.csv", losses_to_csv(*log));
        out[name] = eval_on(cfg, corpus, apply_adapter(base, adapter), dir);
    };

    run_arm("base", AdapterParams::identity(base.dim()), nullptr);
    for (LossMode mode : trained_arms) {
        TrainConfig tc = cfg.train;
        tc.mode = mode;
        TrainResult r = train_adapter(triplets, base, tc);
        run_arm(to_string(mode), r.adapter, &r.log);
    }
    return out;
}

std::vector<GapEntry> cmd_compare(const std::filesystem::path& report_a,
                                  const std::filesystem::path& report_b,
                                  const std::filesystem::path& output_dir) {
    MetricReport a = load_report(report_a);
    MetricReport b = load_report(report_b);
    auto gaps = language_gap(a, b);
    std::filesystem::create_directories(output_dir);
    write_text(output_dir / "compare.csv", gaps_to_csv(a, b, gaps));
    return gaps;
}

std::map<std::string, double> cmd_grad_check(uint64_t seed, std::size_t batches,
                                             std::size_t batch_size, std::size_t dim,
                                             double h) {
    std::map<std::string, double> out;
    for (LossMode mode :
         {LossMode::JsdOnly, LossMode::NceOnly, LossMode::NcePsg, LossMode::Combined}) {
        LossOptions opts;
        opts.mode = mode;
        double worst = 0.0;
        for (std::size_t bi = 0; bi < batches; ++bi) {
            RngKey key = RngKey(seed).absorb("gradcheck").absorb(to_string(mode)).absorb(bi);
            StreamRng vec_rng(key.absorb("vectors"));
            TripletBatch batch;
            for (std::size_t i = 0; i < batch_size; ++i) {
                batch.q_en.push_back(vec_rng.normal_vector(dim));
                batch.p_en.push_back(vec_rng.normal_vector(dim));
                batch.p_tgt.push_back(vec_rng.normal_vector(dim));
            }
            AdapterParams adapter = AdapterParams::identity(dim);
            StreamRng par_rng(key.absorb("adapter"));
            for (auto& w : adapter.W) w += 0.1 * par_rng.next_normal();
            for (auto& b : adapter.b) b += 0.05 * par_rng.next_normal();

            worst = std::max(worst, gradient_check(batch, adapter, opts, h));
        }
        out[to_string(mode)] = worst;
    }
    return out;
}

std::string losses_to_csv(const std::vector<StepLog>& log) {
    std::string s = "step,lr,l_jsd,l_nce,total\n";
    for (const auto& e : log) {
        s += std::to_string(e.step);
        s += ',';
        s += fmt17(e.lr);
        s += ',';
        s += fmt17(e.l_jsd);
        s += ',';
        s += fmt17(e.l_nce);
        s += ',';
        s += fmt17(e.total);
        s += '\n';
    }
    return s;
}

double mean_parallel_jsd(const ParallelCorpus& corpus, const EmbeddingMatrix& base,
                         const AdapterParams& adapter, const std::string& target_lang,
                         double) {
    if (!corpus.has_language(target_lang))
        throw LanguageNotInCorpus("language '" + target_lang + "' not in corpus");
    double sum = 0.0;
    for (const auto& g : corpus.groups()) {
        Vec ze = adapter.apply(base.row(corpus.item(g, "en", ItemKind::Document).id));
        Vec zt = adapter.apply(base.row(corpus.item(g, target_lang, ItemKind::Document).id));
        sum += jsd(softmax(ze), softmax(zt));
    }
    return sum / static_cast<double>(corpus.groups().size());
}

double mean_query_target_cosine(const ParallelCorpus& corpus, const EmbeddingMatrix& base,
                                const AdapterParams& adapter,
                                const std::string& target_lang) {
    if (!corpus.has_language(target_lang))
        throw LanguageNotInCorpus("language '" + target_lang + "' not in corpus");
    double sum = 0.0;
    for (const auto& g : corpus.groups()) {
        Vec q = adapter.apply(base.row(corpus.item(g, "en", ItemKind::Query).id));
        Vec p = adapter.apply(base.row(corpus.item(g, target_lang, ItemKind::Document).id));
        double dq = 0.0, dp = 0.0, dd = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            dq += q[k] * q[k];
            dp += p[k] * p[k];
            dd += q[k] * p[k];
        }
        if (dq == 0.0 || dp == 0.0) throw ZeroVector("zero adapted vector in cosine probe");
        sum += dd / (std::sqrt(dq) * std::sqrt(dp));
    }
    return sum / static_cast<double>(corpus.groups().size());
}

}  // namespace xlb
