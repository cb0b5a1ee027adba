#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xlb/embedding.hpp"
#include "xlb/scenario.hpp"

namespace xlb {

struct RankedDoc {
    std::string doc_id;
    double score;
};

struct Ranking {
    std::string query_id;
    std::vector<RankedDoc> entries;  // descending score, ties by ascending doc_id
};

// Exhaustive scoring of the pool against one query. The matrix must carry
// the normalized flag (scores are cosines via 64-bit dot products of the
// stored float32 rows). Ties at exactly equal scores break by ascending
// doc_id, so the full ordering is deterministic and scheduling-invariant.
Ranking rank(const std::string& query_id, const std::vector<std::string>& pool,
             const EmbeddingMatrix& emb);

// One ranking per instance, assembled in instance order. threads == 0 means
// hardware concurrency; results are identical for any thread count.
std::vector<Ranking> retrieve_all(const std::vector<EvalInstance>& instances,
                                  const EmbeddingMatrix& emb, unsigned threads = 0);

// NDJSON dump: {"query_id": ..., "ranking": [[doc_id, score], ...]}.
void write_rankings(const std::vector<Ranking>& rankings,
                    const std::filesystem::path& path);

}  // namespace xlb
