#include "xlb/align.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"
#include "xlb/rng.hpp"

namespace xlb {

namespace {

void check_finite(const Vec& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw NonFiniteInput(std::string(what) + " contains a non-finite value");
}

double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// dW[r, c] += g[r] * x[c]
void add_outer(Vec& dW, const Vec& g, const Vec& x) {
    std::size_t d = x.size();
    for (std::size_t r = 0; r < g.size(); ++r) {
        double gr = g[r];
        if (gr == 0.0) continue;
        double* row = dW.data() + r * d;
        for (std::size_t c = 0; c < d; ++c) row[c] += gr * x[c];
    }
}

}  // namespace

Vec softmax(const Vec& z, double temperature) {
    if (z.empty()) throw DomainError("softmax of an empty vector");
    if (!(temperature > 0.0)) throw DomainError("softmax temperature must be positive");
    check_finite(z, "softmax input");

    Vec w(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) w[i] = z[i] / temperature;
    double m = *std::max_element(w.begin(), w.end());
    double sum = 0.0;
    for (auto& x : w) {
        x = std::exp(x - m);
        sum += x;
    }
    for (auto& x : w) x /= sum;
    return w;
}

double kl_divergence(const Vec& p, const Vec& q) {
    if (p.size() != q.size())
        throw DimensionMismatch("KL operands differ in length");
    if (p.empty()) throw DomainError("KL of empty distributions");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < 0.0 || q[i] < 0.0) throw DomainError("negative probability mass");
        if (p[i] > 0.0) {
            if (q[i] <= 0.0)
                throw DomainError("KL undefined: Q vanishes where P has mass");
            acc += p[i] * std::log(p[i] / q[i]);
        }
    }
    return acc;
}

double jsd(const Vec& p, const Vec& q) {
    if (p.size() != q.size())
        throw DimensionMismatch("JSD operands differ in length");
    Vec m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
}

double loss_jsd(const Vec& z_en, const Vec& z_tgt, double eps) {
    if (eps < 0.0) throw DomainError("loss_jsd eps must be non-negative");
    return std::sqrt(jsd(softmax(z_en), softmax(z_tgt)) + eps);
}

AdapterParams AdapterParams::identity(std::size_t dim) {
    if (dim == 0) throw DimensionMismatch("adapter dim must be positive");
    AdapterParams p;
    p.dim = dim;
    p.W.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) p.W[i * dim + i] = 1.0;
    p.b.assign(dim, 0.0);
    return p;
}

Vec AdapterParams::apply(std::span<const float> x) const {
    Vec xd(x.size());
    std::transform(x.begin(), x.end(), xd.begin(),
                   [](float f) { return static_cast<double>(f); });
    return apply(xd);
}

Vec AdapterParams::apply(const Vec& x) const {
    if (x.size() != dim)
        throw DimensionMismatch("adapter dim " + std::to_string(dim) +
                                " does not match input dim " + std::to_string(x.size()));
    Vec y(dim);
    for (std::size_t r = 0; r < dim; ++r) {
        const double* row = W.data() + r * dim;
        double acc = b[r];
        for (std::size_t c = 0; c < dim; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

std::vector<TrainTriplet> load_triplets(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<TrainTriplet> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fail = [&](const std::string& why) -> ParseError {
            return ParseError("line " + std::to_string(lineno) + ": " + why);
        };
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw fail("not valid JSON");
        if (!j.is_object()) throw fail("record is not a JSON object");
        static const char* kKeys[] = {"q_en", "p_en", "p_tgt"};
        for (const char* k : kKeys)
            if (!j.contains(k)) throw fail(std::string("missing key \"") + k + "\"");
        if (j.size() != 3) throw fail("unexpected extra keys");
        for (const char* k : kKeys)
            if (!j[k].is_string()) throw fail(std::string("value of \"") + k + "\" is not a string");
        out.push_back({j["q_en"], j["p_en"], j["p_tgt"]});
    }
    return out;
}

void save_triplets(const std::vector<TrainTriplet>& triplets,
                   const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& t : triplets) {
        nlohmann::ordered_json j;
        j["q_en"] = t.q_en;
        j["p_en"] = t.p_en;
        j["p_tgt"] = t.p_tgt;
        f << j.dump() << '\n';
    }
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

TripletBatch make_batch(std::span<const TrainTriplet> triplets,
                        const EmbeddingMatrix& base) {
    if (triplets.empty()) throw EmptyBatch("cannot build an empty triplet batch");
    TripletBatch b;
    auto widen = [&](const std::string& id) {
        auto row = base.row(id);
        Vec v(row.size());
        std::transform(row.begin(), row.end(), v.begin(),
                       [](float f) { return static_cast<double>(f); });
        check_finite(v, "base embedding");
        return v;
    };
    for (const auto& t : triplets) {
        b.q_en.push_back(widen(t.q_en));
        b.p_en.push_back(widen(t.p_en));
        b.p_tgt.push_back(widen(t.p_tgt));
    }
    return b;
}

const char* to_string(LossMode m) {
    switch (m) {
        case LossMode::JsdOnly: return "jsd_only";
        case LossMode::NceOnly: return "nce_only";
        case LossMode::NcePsg: return "nce_psg";
        case LossMode::Combined: return "combined";
    }
    return "?";
}

LossMode loss_mode_from_string(const std::string& s) {
    if (s == "jsd_only") return LossMode::JsdOnly;
    if (s == "nce_only") return LossMode::NceOnly;
    if (s == "nce_psg") return LossMode::NcePsg;
    if (s == "combined") return LossMode::Combined;
    throw InvalidConfig("unknown loss mode '" + s + "'");
}

namespace {

void validate_batch(const TripletBatch& batch, const AdapterParams& adapter) {
    if (batch.size() == 0) throw EmptyBatch("empty triplet batch");
    if (batch.p_en.size() != batch.size() || batch.p_tgt.size() != batch.size())
        throw DimensionMismatch("triplet batch columns differ in length");
    for (const auto* col : {&batch.q_en, &batch.p_en, &batch.p_tgt})
        for (const auto& v : *col)
            if (v.size() != adapter.dim)
                throw DimensionMismatch("triplet vector dim does not match adapter dim");
}

struct NceDirection {
    double loss = 0.0;
    std::vector<Vec> g_anchor;  // d loss / d z_anchor
    std::vector<Vec> g_cand;    // d loss / d z_cand
};

// In-batch InfoNCE with anchors zA (rows) and candidates zB (columns);
// similarity is the cosine of the two adapter outputs divided by T, the
// diagonal holds the positives. Gradients flow through the normalization
// Jacobian (g - (g.y)y)/||x||.
NceDirection nce_direction(const std::vector<Vec>& zA, const std::vector<Vec>& zB,
                           double T, bool want_grads) {
    std::size_t n = zA.size();
    NceDirection out;

    std::vector<Vec> u(n), v(n);
    Vec nu(n), nv(n);
    for (std::size_t i = 0; i < n; ++i) {
        nu[i] = norm(zA[i]);
        nv[i] = norm(zB[i]);
        if (nu[i] == 0.0 || nv[i] == 0.0)
            throw ZeroVector("adapter output has zero norm; cosine undefined");
        u[i] = zA[i];
        for (auto& x : u[i]) x /= nu[i];
        v[i] = zB[i];
        for (auto& x : v[i]) x /= nv[i];
    }

    std::vector<Vec> S(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) S[i][j] = dot(u[i], v[j]) / T;

    // loss_i = logsumexp_j(S_ij) - S_ii
    std::vector<Vec> pi;
    if (want_grads) pi.assign(n, Vec(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double m = *std::max_element(S[i].begin(), S[i].end());
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += std::exp(S[i][j] - m);
        total += std::log(sum) + m - S[i][i];
        if (want_grads)
            for (std::size_t j = 0; j < n; ++j) pi[i][j] = std::exp(S[i][j] - m) / sum;
    }
    out.loss = total / static_cast<double>(n);
    if (!want_grads) return out;

    // d loss / d S_ij = (pi_ij - delta_ij) / n, then the 1/T chain.
    std::vector<Vec> gu(n, Vec(zA[0].size(), 0.0)), gv(n, Vec(zA[0].size(), 0.0));
    double inv_nT = 1.0 / (static_cast<double>(n) * T);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double coef = (pi[i][j] - (i == j ? 1.0 : 0.0)) * inv_nT;
            if (coef == 0.0) continue;
            axpy(gu[i], coef, v[j]);
            axpy(gv[j], coef, u[i]);
        }
    }
    out.g_anchor.assign(n, Vec(zA[0].size()));
    out.g_cand.assign(n, Vec(zA[0].size()));
    for (std::size_t i = 0; i < n; ++i) {
        double du = dot(gu[i], u[i]);
        double dv = dot(gv[i], v[i]);
        for (std::size_t k = 0; k < u[i].size(); ++k) {
            out.g_anchor[i][k] = (gu[i][k] - du * u[i][k]) / nu[i];
            out.g_cand[i][k] = (gv[i][k] - dv * v[i][k]) / nv[i];
        }
    }
    return out;
}

double nce_value(const TripletBatch& batch, const AdapterParams& adapter,
                 const LossOptions& opts, bool passages) {
    std::vector<Vec> zt, zc;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        zt.push_back(adapter.apply(batch.p_tgt[i]));
        zc.push_back(adapter.apply(passages ? batch.p_en[i] : batch.q_en[i]));
    }
    double l = nce_direction(zt, zc, opts.temperature, false).loss;
    if (opts.symmetric_nce)
        l = 0.5 * (l + nce_direction(zc, zt, opts.temperature, false).loss);
    if (!std::isfinite(l)) throw NonFiniteLoss("contrastive loss is not finite");
    return l;
}

}  // namespace

double loss_nce(const TripletBatch& batch, const AdapterParams& adapter,
                const LossOptions& opts) {
    validate_batch(batch, adapter);
    return nce_value(batch, adapter, opts, false);
}

double loss_nce_psg(const TripletBatch& batch, const AdapterParams& adapter,
                    const LossOptions& opts) {
    validate_batch(batch, adapter);
    return nce_value(batch, adapter, opts, true);
}

LossBreakdown loss_combined(const TripletBatch& batch, const AdapterParams& adapter,
                            const LossOptions& opts) {
    validate_batch(batch, adapter);
    LossBreakdown lb;
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i)
        sum += loss_jsd(adapter.apply(batch.p_en[i]), adapter.apply(batch.p_tgt[i]),
                        opts.eps_jsd);
    lb.l_jsd = sum / static_cast<double>(batch.size());
    lb.l_nce = nce_value(batch, adapter, opts, opts.mode == LossMode::NcePsg);

    switch (opts.mode) {
        case LossMode::JsdOnly: lb.total = opts.weight_jsd * lb.l_jsd; break;
        case LossMode::NceOnly:
        case LossMode::NcePsg: lb.total = opts.weight_nce * lb.l_nce; break;
        case LossMode::Combined:
            lb.total = opts.weight_jsd * lb.l_jsd + opts.weight_nce * lb.l_nce;
            break;
    }
    if (!std::isfinite(lb.total)) throw NonFiniteLoss("total loss is not finite");
    return lb;
}

AdapterGrad grad_adapter(const TripletBatch& batch, const AdapterParams& adapter,
                         const LossOptions& opts, LossBreakdown* out_loss) {
    validate_batch(batch, adapter);
    std::size_t n = batch.size();
    std::size_t d = adapter.dim;

    AdapterGrad grad;
    grad.dW.assign(d * d, 0.0);
    grad.db.assign(d, 0.0);

    bool use_jsd = opts.mode == LossMode::JsdOnly || opts.mode == LossMode::Combined;
    bool use_nce = opts.mode != LossMode::JsdOnly;
    bool passages = opts.mode == LossMode::NcePsg;

    if (use_jsd) {
        for (std::size_t i = 0; i < n; ++i) {
            Vec ze = adapter.apply(batch.p_en[i]);
            Vec zt = adapter.apply(batch.p_tgt[i]);
            Vec P = softmax(ze);
            Vec Q = softmax(zt);
            Vec M(d);
            for (std::size_t k = 0; k < d; ++k) M[k] = 0.5 * (P[k] + Q[k]);
            double J = 0.5 * kl_divergence(P, M) + 0.5 * kl_divergence(Q, M);
            // d total / d J through the mean and the sqrt chain
            double c = opts.weight_jsd / (2.0 * static_cast<double>(n) *
                                          std::sqrt(J + opts.eps_jsd));

            // dJ/dP_k = 0.5 ln(P_k/M_k); backprop through softmax:
            // g_z = P (x) (gP - <gP, P>)
            Vec gP(d), gQ(d);
            for (std::size_t k = 0; k < d; ++k) {
                gP[k] = P[k] > 0.0 ? c * 0.5 * std::log(P[k] / M[k]) : 0.0;
                gQ[k] = Q[k] > 0.0 ? c * 0.5 * std::log(Q[k] / M[k]) : 0.0;
            }
            double dp = dot(gP, P), dq = dot(gQ, Q);
            Vec gze(d), gzt(d);
            for (std::size_t k = 0; k < d; ++k) {
                gze[k] = P[k] * (gP[k] - dp);
                gzt[k] = Q[k] * (gQ[k] - dq);
            }
            add_outer(grad.dW, gze, batch.p_en[i]);
            add_outer(grad.dW, gzt, batch.p_tgt[i]);
            axpy(grad.db, 1.0, gze);
            axpy(grad.db, 1.0, gzt);
        }
    }

    if (use_nce) {
        std::vector<Vec> zt, zc;
        const auto& cands = passages ? batch.p_en : batch.q_en;
        for (std::size_t i = 0; i < n; ++i) {
            zt.push_back(adapter.apply(batch.p_tgt[i]));
            zc.push_back(adapter.apply(cands[i]));
        }
        double w = opts.weight_nce * (opts.symmetric_nce ? 0.5 : 1.0);
        auto accumulate = [&](const NceDirection& dir, const std::vector<Vec>& anchors_raw,
                              const std::vector<Vec>& cands_raw) {
            for (std::size_t i = 0; i < n; ++i) {
                Vec ga = dir.g_anchor[i], gc = dir.g_cand[i];
                for (auto& x : ga) x *= w;
                for (auto& x : gc) x *= w;
                add_outer(grad.dW, ga, anchors_raw[i]);
                add_outer(grad.dW, gc, cands_raw[i]);
                axpy(grad.db, 1.0, ga);
                axpy(grad.db, 1.0, gc);
            }
        };
        accumulate(nce_direction(zt, zc, opts.temperature, true), batch.p_tgt, cands);
        if (opts.symmetric_nce)
            accumulate(nce_direction(zc, zt, opts.temperature, true), cands, batch.p_tgt);
    }

    for (double g : grad.dW)
        if (!std::isfinite(g)) throw NonFiniteGradient("non-finite entry in dW");
    for (double g : grad.db)
        if (!std::isfinite(g)) throw NonFiniteGradient("non-finite entry in db");

    if (out_loss) *out_loss = loss_combined(batch, adapter, opts);
    return grad;
}

double gradient_check(const TripletBatch& batch, const AdapterParams& adapter,
                      const LossOptions& opts, double h) {
    AdapterGrad analytic = grad_adapter(batch, adapter, opts);
    AdapterParams probe = adapter;

    auto eval = [&]() { return loss_combined(batch, probe, opts).total; };
    std::size_t nw = adapter.W.size(), nb = adapter.b.size();
    Vec numeric(nw + nb);
    for (std::size_t i = 0; i < nw; ++i) {
        double keep = probe.W[i];
        probe.W[i] = keep + h;
        double up = eval();
        probe.W[i] = keep - h;
        double down = eval();
        probe.W[i] = keep;
        numeric[i] = (up - down) / (2.0 * h);
    }
    for (std::size_t i = 0; i < nb; ++i) {
        double keep = probe.b[i];
        probe.b[i] = keep + h;
        double up = eval();
        probe.b[i] = keep - h;
        double down = eval();
        probe.b[i] = keep;
        numeric[nw + i] = (up - down) / (2.0 * h);
    }

    double scale = 1e-10;
    for (double g : numeric) scale = std::max(scale, std::abs(g));
    double worst = 0.0;
    for (std::size_t i = 0; i < nw; ++i)
        worst = std::max(worst, std::abs(analytic.dW[i] - numeric[i]) / scale);
    for (std::size_t i = 0; i < nb; ++i)
        worst = std::max(worst, std::abs(analytic.db[i] - numeric[nw + i]) / scale);
    return worst;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw InvalidConfig("lr must be positive");
    if (batch_size == 0) throw InvalidConfig("batch_size must be at least 1");
    if (epochs == 0) throw InvalidConfig("epochs must be at least 1");
    if (warmup_ratio < 0.0 || warmup_ratio >= 1.0)
        throw InvalidConfig("warmup_ratio must lie in [0, 1)");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw InvalidConfig("betas must lie in [0, 1)");
    if (weight_decay < 0.0) throw InvalidConfig("weight_decay must be non-negative");
    if (!(adam_eps > 0.0)) throw InvalidConfig("adam_eps must be positive");
    if (!(eps_jsd > 0.0)) throw InvalidConfig("eps_jsd must be positive for training");
    if (!(temperature > 0.0)) throw InvalidConfig("temperature must be positive");
    if (weight_jsd < 0.0 || weight_nce < 0.0)
        throw InvalidConfig("loss weights must be non-negative");
}

LossOptions TrainConfig::loss_options() const {
    LossOptions o;
    o.mode = mode;
    o.eps_jsd = eps_jsd;
    o.temperature = temperature;
    o.symmetric_nce = symmetric_nce;
    o.weight_jsd = weight_jsd;
    o.weight_nce = weight_nce;
    return o;
}

double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
    if (total_steps == 0) throw DomainError("schedule needs at least one step");
    if (step < 1 || step > total_steps)
        throw DomainError("step " + std::to_string(step) + " outside [1, " +
                          std::to_string(total_steps) + "]");
    double total = static_cast<double>(total_steps);
    double warmup = cfg.warmup_ratio * total;
    double s = static_cast<double>(step);
    if (s <= warmup) return cfg.lr * s / warmup;
    return cfg.lr * (total - s) / (total - warmup);
}

AdamState AdamState::zeros(std::size_t dim) {
    AdamState s;
    s.mW.assign(dim * dim, 0.0);
    s.vW.assign(dim * dim, 0.0);
    s.mb.assign(dim, 0.0);
    s.vb.assign(dim, 0.0);
    return s;
}

void adamw_step(AdapterParams& params, const AdapterGrad& grad, AdamState& state,
                double lr, const TrainConfig& cfg) {
    if (grad.dW.size() != params.W.size() || grad.db.size() != params.b.size())
        throw DimensionMismatch("gradient shape does not match parameters");
    ++state.t;
    double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    auto update = [&](Vec& theta, const Vec& g, Vec& m, Vec& v) {
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            double mhat = m[i] / c1;
            double vhat = v[i] / c2;
            theta[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.adam_eps) +
                              cfg.weight_decay * theta[i]);
        }
    };
    update(params.W, grad.dW, state.mW, state.vW);
    update(params.b, grad.db, state.mb, state.vb);
}

TrainResult train_adapter(const std::vector<TrainTriplet>& triplets,
                          const EmbeddingMatrix& base, const TrainConfig& cfg) {
    cfg.validate();
    if (triplets.empty()) throw EmptyBatch("no training triplets");

    // Resolve and widen every vector once.
    TripletBatch all = make_batch(triplets, base);
    std::size_t n = all.size();
    std::size_t d = all.dim();

    TrainResult result;
    result.adapter = AdapterParams::identity(d);
    AdamState state = AdamState::zeros(d);
    LossOptions opts = cfg.loss_options();

    std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    std::size_t total_steps = cfg.epochs * steps_per_epoch;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        StreamRng rng(RngKey(cfg.seed).absorb("shuffle").absorb(epoch));
        deterministic_shuffle(order, rng);

        for (std::size_t off = 0; off < n; off += cfg.batch_size) {
            std::size_t end = std::min(n, off + cfg.batch_size);
            TripletBatch batch;
            for (std::size_t i = off; i < end; ++i) {
                batch.q_en.push_back(all.q_en[order[i]]);
                batch.p_en.push_back(all.p_en[order[i]]);
                batch.p_tgt.push_back(all.p_tgt[order[i]]);
            }
            ++step;
            double lr = lr_at(step, total_steps, cfg);
            LossBreakdown lb;
            AdapterGrad grad;
            try {
                grad = grad_adapter(batch, result.adapter, opts, &lb);
            } catch (const NonFiniteLoss& e) {
                throw NonFiniteLoss("step " + std::to_string(step) + ": " + e.what());
            } catch (const NonFiniteGradient& e) {
                throw NonFiniteGradient("step " + std::to_string(step) + ": " + e.what());
            }
            adamw_step(result.adapter, grad, state, lr, cfg);
            result.log.push_back({step, lr, lb.l_jsd, lb.l_nce, lb.total});
        }
    }
    return result;
}

namespace {

constexpr char kAdapterMagic[4] = {'X', 'L', 'A', 'D'};
constexpr uint16_t kAdapterVersion = 1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::string& out, double d) {
    uint64_t bits = std::bit_cast<uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

}  // namespace

void save_adapter(const AdapterParams& params, const std::filesystem::path& path) {
    std::string out;
    out.append(kAdapterMagic, 4);
    put_u16(out, kAdapterVersion);
    put_u16(out, 0);
    put_u32(out, static_cast<uint32_t>(params.dim));
    for (double w : params.W) put_f64(out, w);
    for (double x : params.b) put_f64(out, x);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

AdapterParams load_adapter(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    auto need = [&](std::size_t k) {
        if (blob.size() - pos < k) throw FormatError("adapter file truncated");
    };
    need(4);
    if (std::memcmp(blob.data(), kAdapterMagic, 4) != 0)
        throw FormatError("bad magic in '" + path.string() + "'");
    pos = 4;
    auto u16 = [&]() {
        need(2);
        uint16_t v = static_cast<uint16_t>(static_cast<unsigned char>(blob[pos]) |
                                           (static_cast<unsigned char>(blob[pos + 1]) << 8));
        pos += 2;
        return v;
    };
    auto u32 = [&]() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<unsigned char>(blob[pos + i])) << (8 * i);
        pos += 4;
        return v;
    };
    auto f64 = [&]() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(blob[pos + i])) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    };

    uint16_t version = u16();
    if (version != kAdapterVersion)
        throw FormatError("unsupported adapter version " + std::to_string(version));
    u16();  // flags, reserved
    uint32_t dim = u32();
    if (dim == 0) throw FormatError("adapter file declares dim 0");

    AdapterParams p;
    p.dim = dim;
    p.W.resize(static_cast<std::size_t>(dim) * dim);
    p.b.resize(dim);
    for (auto& w : p.W) w = f64();
    for (auto& x : p.b) x = f64();
    if (pos != blob.size())
        throw FormatError("trailing bytes after payload in '" + path.string() + "'");
    return p;
}

EmbeddingMatrix apply_adapter(const EmbeddingMatrix& base, const AdapterParams& params) {
    if (base.dim() != params.dim)
        throw DimensionMismatch("adapter dim " + std::to_string(params.dim) +
                                " does not match embedding dim " + std::to_string(base.dim()));
    EmbeddingMatrix out(base.dim(), false);
    for (std::size_t r = 0; r < base.rows(); ++r)
        out.add_row(base.id_at(r), params.apply(base.row_at(r)));
    return out;
}

}  // namespace xlb
