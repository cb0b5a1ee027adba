#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xlb/embedding.hpp"

namespace xlb {

using Vec = std::vector<double>;

// Numerically stable softmax (max subtracted before exponentiation,
// natural base). temperature divides the logits; 1 leaves them untouched.
Vec softmax(const Vec& z, double temperature = 1.0);

// sum_k P_k ln(P_k / Q_k) with 0 ln 0 := 0. Q must be positive wherever P
// is; inputs are expected to be distributions (softmax outputs qualify).
double kl_divergence(const Vec& p, const Vec& q);

// Jensen-Shannon divergence 0.5 KL(P||M) + 0.5 KL(Q||M), M = (P+Q)/2.
// Symmetric by construction and bounded by ln 2.
double jsd(const Vec& p, const Vec& q);

// sqrt(JSD(softmax(z_en) || softmax(z_tgt)) + eps). The square root of the
// JSD is a metric, so this term behaves like a distance during training.
double loss_jsd(const Vec& z_en, const Vec& z_tgt, double eps = 1e-12);

// Linear adapter z = W x + b over frozen base embeddings. W starts as the
// identity, b as zero, both 64-bit.
struct AdapterParams {
    std::size_t dim = 0;
    Vec W;  // dim*dim, row-major
    Vec b;  // dim

    static AdapterParams identity(std::size_t dim);
    Vec apply(std::span<const float> x) const;
    Vec apply(const Vec& x) const;
};

struct TrainTriplet {
    std::string q_en;   // English query id
    std::string p_en;   // English passage id
    std::string p_tgt;  // parallel target-language passage id
};

std::vector<TrainTriplet> load_triplets(const std::filesystem::path& path);
void save_triplets(const std::vector<TrainTriplet>& triplets,
                   const std::filesystem::path& path);

// Resolved triplet vectors (base embeddings widened to 64-bit).
struct TripletBatch {
    std::vector<Vec> q_en;
    std::vector<Vec> p_en;
    std::vector<Vec> p_tgt;
    std::size_t size() const noexcept { return q_en.size(); }
    std::size_t dim() const noexcept { return q_en.empty() ? 0 : q_en[0].size(); }
};

TripletBatch make_batch(std::span<const TrainTriplet> triplets,
                        const EmbeddingMatrix& base);

enum class LossMode { JsdOnly, NceOnly, NcePsg, Combined };
const char* to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

struct LossOptions {
    LossMode mode = LossMode::Combined;
    double eps_jsd = 1e-12;
    double temperature = 1.0;   // divides NCE similarities; 1 = plain cosine
    bool symmetric_nce = false; // also anchor on queries and average
    double weight_jsd = 1.0;    // Combined mixes the terms with these
    double weight_nce = 1.0;
};

// l_jsd: batch mean of per-pair sqrt(JSD + eps) over (p_en, p_tgt) adapter
// outputs (raw, not normalized). l_nce: in-batch InfoNCE anchored on the
// adapted target passage with the other adapted English queries (or
// passages for NcePsg) as negatives; similarities are cosines of the
// L2-normalized adapter outputs, the positive term appears exactly once in
// the denominator. total honors the mode; excluded terms are still
// reported.
struct LossBreakdown {
    double l_jsd = 0.0;
    double l_nce = 0.0;
    double total = 0.0;
};

double loss_nce(const TripletBatch& batch, const AdapterParams& adapter,
                const LossOptions& opts = {});
double loss_nce_psg(const TripletBatch& batch, const AdapterParams& adapter,
                    const LossOptions& opts = {});
LossBreakdown loss_combined(const TripletBatch& batch, const AdapterParams& adapter,
                            const LossOptions& opts = {});

struct AdapterGrad {
    Vec dW;  // dim*dim, row-major
    Vec db;  // dim
};

// Analytic gradient of the mode's total loss. Backpropagates through the
// softmax Jacobian, the JSD partials d/dP = 0.5 ln(P/M), the sqrt chain
// 1/(2 sqrt(J+eps)) and the normalization Jacobian (I - y y^T)/||x||.
AdapterGrad grad_adapter(const TripletBatch& batch, const AdapterParams& adapter,
                         const LossOptions& opts = {}, LossBreakdown* out_loss = nullptr);

// Central-difference verification of grad_adapter on one batch. Returns the
// maximum |analytic - numeric| over all W and b entries, scaled by the
// largest numeric gradient magnitude.
double gradient_check(const TripletBatch& batch, const AdapterParams& adapter,
                      const LossOptions& opts = {}, double h = 1e-5);

struct TrainConfig {
    LossMode mode = LossMode::Combined;
    double lr = 0.045;
    std::size_t batch_size = 32;
    std::size_t epochs = 1;
    double warmup_ratio = 0.15;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double weight_decay = 0.01;
    double adam_eps = 1e-8;
    double eps_jsd = 1e-12;
    double temperature = 1.0;
    bool symmetric_nce = false;
    double weight_jsd = 1.0;
    double weight_nce = 1.0;
    uint64_t seed = 42;

    void validate() const;
    LossOptions loss_options() const;
};

// Linear warmup then linear decay: ramps 0 -> lr over warmup_ratio * total
// steps, reaches lr exactly at the warmup boundary, and hits 0 at
// total_steps. step is 1-based.
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

struct AdamState {
    Vec mW, vW, mb, vb;
    std::size_t t = 0;
    static AdamState zeros(std::size_t dim);
};

// Decoupled-weight-decay Adam update, 64-bit throughout.
void adamw_step(AdapterParams& params, const AdapterGrad& grad, AdamState& state,
                double lr, const TrainConfig& cfg);

struct StepLog {
    std::size_t step = 0;
    double lr = 0.0;
    double l_jsd = 0.0;
    double l_nce = 0.0;
    double total = 0.0;
};

struct TrainResult {
    AdapterParams adapter;
    std::vector<StepLog> log;
};

// One pass (cfg.epochs) over the triplets in seeded-shuffle order, batches
// of cfg.batch_size with the final partial batch kept. Deterministic:
// identical inputs and seed give bit-identical parameters and logs.
TrainResult train_adapter(const std::vector<TrainTriplet>& triplets,
                          const EmbeddingMatrix& base, const TrainConfig& cfg);

// Checkpoint format: magic "XLAD" | u16 version=1 | u16 flags=0 | u32 dim |
// W float64 LE row-major | b float64 LE.
void save_adapter(const AdapterParams& params, const std::filesystem::path& path);
AdapterParams load_adapter(const std::filesystem::path& path);

// Rows become float32(W x + b); the result is unnormalized.
EmbeddingMatrix apply_adapter(const EmbeddingMatrix& base, const AdapterParams& params);

}  // namespace xlb
