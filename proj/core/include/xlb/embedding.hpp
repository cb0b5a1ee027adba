#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace xlb {

// Dense row-major float32 embedding store keyed by item id.
//
// On-disk format (all integers little-endian):
//   magic "XLEB" | u16 version=1 | u16 flags (bit0: rows are L2-normalized)
//   u32 rows | u32 dim
//   id table: u32 count (== rows), then per id u16 byte-length + UTF-8 bytes
//   payload: rows*dim float32, row-major
class EmbeddingMatrix {
public:
    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t dim, bool normalized = false);

    void add_row(const std::string& id, std::span<const float> values);
    void add_row(const std::string& id, const std::vector<double>& values);

    std::size_t rows() const noexcept { return ids_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool normalized() const noexcept { return normalized_; }
    void set_normalized(bool v) noexcept { normalized_ = v; }

    bool has(const std::string& id) const;
    // Throws MissingEmbedding if the id is unknown.
    std::span<const float> row(const std::string& id) const;
    std::span<const float> row_at(std::size_t index) const;
    const std::string& id_at(std::size_t index) const { return ids_[index]; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::size_t dim_ = 0;
    bool normalized_ = false;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Cosine similarity with 64-bit accumulation, clamped to [-1, 1].
// Throws DimensionMismatch on length disagreement, ZeroVector if either
// operand has zero norm.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Returns a copy whose rows are unit L2 norm (computed in 64-bit, stored
// float32) with the normalized flag set. Throws ZeroVector naming the
// offending row id.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m);

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace xlb
