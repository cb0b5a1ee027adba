#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xlb/align.hpp"
#include "xlb/corpus.hpp"
#include "xlb/embedding.hpp"

namespace xlb {

// Controls the synthetic misalignment model. alpha mixes the semantic
// component against the language bias; bias_strength scales the shared
// per-language bias direction; noise_sigma is per-coordinate Gaussian.
struct SynthConfig {
    uint64_t seed = 42;
    std::size_t n_groups = 500;
    std::vector<std::string> languages = {"en", "zh"};
    std::size_t dim = 64;
    double alpha = 0.6;
    double bias_strength = 0.5;
    double noise_sigma = 0.05;

    void validate() const;  // throws InvalidConfig
};

// Fully parallel corpus with placeholder texts; ids are
// "<group>-<lang>-<q|d>", groups are zero-padded so normalized order equals
// numeric order. Deterministic in cfg alone.
ParallelCorpus gen_synthetic_corpus(const SynthConfig& cfg);

// Embedding of item (group g, lang l, kind k):
//
//   base  = alpha * rho(l,k) * (Rq_l R_l s_g)   [queries]
//           alpha * (R_l s_g)                   [documents]
//         + (1 - alpha) * bias_strength * u_l
//   emb   = base + delta_k + noise,  noise ~ N(0, noise_sigma^2 I)
//
// s_g is a unit latent per group, u_l a unit per-language bias shared by
// queries and documents, R_l = QR(alpha I + (1-alpha) G_l / sqrt(dim)) a
// seed-derived rotation (identity for English and exactly identity at
// alpha = 1), and delta_k = 0.1 * base/||base|| for queries only, so
// queries are never bitwise equal to their documents while query/document
// cosines in the degenerate limits stay exact.
//
// Non-English queries additionally pass through a second seed-derived
// rotation Rq_l of the same construction and an attenuation rho < 1: the
// encoder understands non-English queries worse than documents, which is
// what buries their gold documents under bias-boosted distractors.
//
// All randomness comes from counter-based streams keyed by
// (seed, purpose, group/lang/kind), so any subset of items embeds
// identically regardless of evaluation order.
EmbeddingMatrix embed_synthetic(const ParallelCorpus& corpus, const SynthConfig& cfg);

// (q_en, p_en, p_tgt) per group for the first `count` groups in normalized
// order. target_lang must exist in the corpus and differ from "en".
std::vector<TrainTriplet> make_parallel_triplets(const ParallelCorpus& corpus,
                                                 std::size_t count,
                                                 const std::string& target_lang);

}  // namespace xlb
