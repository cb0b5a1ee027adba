#include "xlb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xlb/errors.hpp"
#include "xlb/rng.hpp"

namespace xlb {

namespace {

// How much worse the synthetic encoder reads non-English queries than
// documents; calibration constants of the artifact, not tunables.
constexpr double kQueryAttenuation = 0.65;
constexpr double kKindOffsetScale = 0.1;
constexpr double kDocRotationSpread = 1.5;
constexpr double kQueryRotationSpread = 0.8;

Vec unit_normal_vector(RngKey key, std::size_t dim) {
    StreamRng rng(key);
    Vec v = rng.normal_vector(dim);
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

// Householder QR of a square matrix; returns Q with diag(R) forced
// positive, so the factorization (hence the rotation) is unique and
// deterministic.
std::vector<double> qr_orthonormalize(std::vector<double> a, std::size_t d) {
    std::vector<double> q(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) q[i * d + i] = 1.0;

    std::vector<double> v(d);
    for (std::size_t k = 0; k < d; ++k) {
        double nx = 0.0;
        for (std::size_t i = k; i < d; ++i) nx += a[i * d + k] * a[i * d + k];
        nx = std::sqrt(nx);
        if (nx == 0.0) continue;
        double alpha = a[k * d + k] >= 0.0 ? -nx : nx;
        double nv2 = 0.0;
        for (std::size_t i = k; i < d; ++i) {
            v[i] = a[i * d + k] - (i == k ? alpha : 0.0);
            nv2 += v[i] * v[i];
        }
        if (nv2 == 0.0) continue;
        double nv = std::sqrt(nv2);
        for (std::size_t i = k; i < d; ++i) v[i] /= nv;

        // A[k:, :] -= 2 v (v^T A[k:, :])
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < d; ++i) s += v[i] * a[i * d + j];
            s *= 2.0;
            for (std::size_t i = k; i < d; ++i) a[i * d + j] -= s * v[i];
        }
        // Q[:, k:] -= 2 (Q[:, k:] v) v^T
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = k; j < d; ++j) s += q[i * d + j] * v[j];
            s *= 2.0;
            for (std::size_t j = k; j < d; ++j) q[i * d + j] -= s * v[j];
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        if (a[j * d + j] < 0.0)
            for (std::size_t i = 0; i < d; ++i) q[i * d + j] = -q[i * d + j];
    return q;
}

// QR(alpha I + spread (1-alpha) G / sqrt(d)): exactly identity at alpha = 1,
// a Haar-like rotation at alpha = 0, partial misalignment in between. The
// spread sets how far the rotation moves at a given alpha; the doc-side
// spread keeps the cross-language signal well clear of the per-coordinate
// noise floor at the default alpha.
std::vector<double> language_rotation(RngKey key, std::size_t d, double alpha,
                                      double spread) {
    std::vector<double> m(d * d, 0.0);
    if (alpha == 1.0) {
        for (std::size_t i = 0; i < d; ++i) m[i * d + i] = 1.0;
        return m;
    }
    StreamRng rng(key);
    double scale = spread * (1.0 - alpha) / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d * d; ++i) m[i] = scale * rng.next_normal();
    for (std::size_t i = 0; i < d; ++i) m[i * d + i] += alpha;
    return qr_orthonormalize(std::move(m), d);
}

Vec matvec(const std::vector<double>& m, const Vec& x) {
    std::size_t d = x.size();
    Vec y(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        double acc = 0.0;
        const double* row = m.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_groups == 0) throw InvalidConfig("n_groups must be at least 1");
    if (dim < 2) throw InvalidConfig("dim must be at least 2");
    if (alpha < 0.0 || alpha > 1.0) throw InvalidConfig("alpha must lie in [0, 1]");
    if (bias_strength < 0.0) throw InvalidConfig("bias_strength must be non-negative");
    if (noise_sigma < 0.0) throw InvalidConfig("noise_sigma must be non-negative");
    if (languages.empty()) throw InvalidConfig("languages must be non-empty");
    std::set<std::string> seen;
    for (const auto& l : languages) {
        try {
            validate_language_tag(l);
        } catch (const ParseError& e) {
            throw InvalidConfig(e.what());
        }
        if (!seen.insert(l).second) throw InvalidConfig("duplicate language '" + l + "'");
    }
    if (!seen.contains("en")) throw InvalidConfig("languages must contain 'en'");
}

ParallelCorpus gen_synthetic_corpus(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<CorpusItem> items;
    items.reserve(cfg.n_groups * cfg.languages.size() * 2);
    for (std::size_t g = 0; g < cfg.n_groups; ++g) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "g%05zu", g);
        std::string group(buf);
        for (const auto& lang : cfg.languages) {
            for (ItemKind kind : {ItemKind::Query, ItemKind::Document}) {
                CorpusItem it;
                it.group = group;
                it.lang = lang;
                it.kind = kind;
                it.id = group + "-" + lang + (kind == ItemKind::Query ? "-q" : "-d");
                it.text = std::string("synthetic ") + to_string(kind) + " " + group + " " + lang;
                items.push_back(std::move(it));
            }
        }
    }
    return ParallelCorpus::from_items(std::move(items));
}

EmbeddingMatrix embed_synthetic(const ParallelCorpus& corpus, const SynthConfig& cfg) {
    cfg.validate();
    std::vector<std::string> cfg_langs = cfg.languages;
    std::sort(cfg_langs.begin(), cfg_langs.end());
    if (corpus.languages() != cfg_langs)
        throw LanguageMismatch("corpus languages do not match the synth config");

    RngKey root(cfg.seed);
    struct LangModel {
        std::vector<double> rot_doc;
        std::vector<double> rot_query;  // extra rotation, queries only
        Vec bias;
        bool english;
    };
    std::unordered_map<std::string, LangModel> models;
    for (const auto& lang : cfg.languages) {
        LangModel m;
        m.english = lang == "en";
        if (m.english) {
            m.rot_doc.assign(cfg.dim * cfg.dim, 0.0);
            for (std::size_t i = 0; i < cfg.dim; ++i) m.rot_doc[i * cfg.dim + i] = 1.0;
            m.rot_query = m.rot_doc;
        } else {
            m.rot_doc = language_rotation(root.absorb("rot").absorb(lang), cfg.dim, cfg.alpha,
                                          kDocRotationSpread);
            m.rot_query = language_rotation(root.absorb("qrot").absorb(lang), cfg.dim,
                                            cfg.alpha, kQueryRotationSpread);
        }
        m.bias = unit_normal_vector(root.absorb("bias").absorb(lang), cfg.dim);
        models.emplace(lang, std::move(m));
    }

    EmbeddingMatrix out(cfg.dim, false);
    std::unordered_map<std::string, Vec> latents;
    for (const auto& it : corpus.items()) {
        auto lit = latents.find(it.group);
        if (lit == latents.end())
            lit = latents
                      .emplace(it.group,
                               unit_normal_vector(root.absorb("group").absorb(it.group), cfg.dim))
                      .first;
        const Vec& s_g = lit->second;
        const LangModel& lm = models.at(it.lang);
        bool query = it.kind == ItemKind::Query;

        Vec sem = matvec(lm.rot_doc, s_g);
        double rho = 1.0;
        if (query && !lm.english) {
            sem = matvec(lm.rot_query, sem);
            rho = kQueryAttenuation;
        }

        Vec base(cfg.dim);
        double bias_coef = (1.0 - cfg.alpha) * cfg.bias_strength;
        for (std::size_t k = 0; k < cfg.dim; ++k)
            base[k] = cfg.alpha * rho * sem[k] + bias_coef * lm.bias[k];

        Vec emb = base;
        if (query) {
            double bn = 0.0;
            for (double x : base) bn += x * x;
            bn = std::sqrt(bn);
            if (bn > 0.0)
                for (std::size_t k = 0; k < cfg.dim; ++k)
                    emb[k] += kKindOffsetScale * base[k] / bn;
        }
        if (cfg.noise_sigma > 0.0) {
            StreamRng nrng(root.absorb("noise")
                               .absorb(it.group)
                               .absorb(it.lang)
                               .absorb(query ? "q" : "d"));
            for (std::size_t k = 0; k < cfg.dim; ++k)
                emb[k] += cfg.noise_sigma * nrng.next_normal();
        }
        out.add_row(it.id, emb);
    }
    return out;
}

std::vector<TrainTriplet> make_parallel_triplets(const ParallelCorpus& corpus,
                                                 std::size_t count,
                                                 const std::string& target_lang) {
    if (target_lang == "en")
        throw InvalidConfig("triplet target language must differ from 'en'");
    if (!corpus.has_language("en") || !corpus.has_language(target_lang))
        throw LanguageNotInCorpus("triplets need both 'en' and '" + target_lang +
                                  "' in the corpus");
    if (count == 0 || count > corpus.groups().size())
        throw InvalidConfig("triplet count " + std::to_string(count) +
                            " outside [1, " + std::to_string(corpus.groups().size()) + "]");

    std::vector<TrainTriplet> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string& g = corpus.groups()[i];
        out.push_back({corpus.item(g, "en", ItemKind::Query).id,
                       corpus.item(g, "en", ItemKind::Document).id,
                       corpus.item(g, target_lang, ItemKind::Document).id});
    }
    return out;
}

}  // namespace xlb
