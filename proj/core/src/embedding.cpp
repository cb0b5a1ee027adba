#include "xlb/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "xlb/errors.hpp"

namespace xlb {

namespace {

constexpr char kMagic[4] = {'X', 'L', 'E', 'B'};
constexpr uint16_t kVersion = 1;
constexpr uint16_t kFlagNormalized = 0x1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
    static_assert(sizeof(float) == 4);
    uint32_t bits = std::bit_cast<uint32_t>(f);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw FormatError("embedding file truncated");
    }
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, bool normalized)
    : dim_(dim), normalized_(normalized) {
    if (dim_ == 0) throw DimensionMismatch("embedding dim must be positive");
}

void EmbeddingMatrix::add_row(const std::string& id, std::span<const float> values) {
    if (dim_ == 0) throw DimensionMismatch("embedding matrix has no dimension set");
    if (values.size() != dim_)
        throw DimensionMismatch("row '" + id + "' has " + std::to_string(values.size()) +
                                " values, expected " + std::to_string(dim_));
    if (!index_.emplace(id, ids_.size()).second)
        throw DuplicateItem("duplicate embedding id '" + id + "'");
    ids_.push_back(id);
    data_.insert(data_.end(), values.begin(), values.end());
}

void EmbeddingMatrix::add_row(const std::string& id, const std::vector<double>& values) {
    std::vector<float> f(values.size());
    std::transform(values.begin(), values.end(), f.begin(),
                   [](double d) { return static_cast<float>(d); });
    add_row(id, std::span<const float>(f));
}

bool EmbeddingMatrix::has(const std::string& id) const { return index_.contains(id); }

std::span<const float> EmbeddingMatrix::row(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw MissingEmbedding("no embedding for id '" + id + "'");
    return row_at(it->second);
}

std::span<const float> EmbeddingMatrix::row_at(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("cosine operands differ in length: " +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x = a[i], y = b[i];
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if (na == 0.0 || nb == 0.0) throw ZeroVector("cosine of a zero vector is undefined");
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
    EmbeddingMatrix out(m.dim(), true);
    std::vector<float> buf(m.dim());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row_at(r);
        double norm2 = 0.0;
        for (float v : row) norm2 += static_cast<double>(v) * v;
        if (norm2 == 0.0)
            throw ZeroVector("cannot normalize zero row '" + m.id_at(r) + "'");
        double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t i = 0; i < row.size(); ++i)
            buf[i] = static_cast<float>(row[i] * inv);
        out.add_row(m.id_at(r), std::span<const float>(buf));
    }
    return out;
}

void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u16(out, kVersion);
    put_u16(out, m.normalized() ? kFlagNormalized : 0);
    put_u32(out, static_cast<uint32_t>(m.rows()));
    put_u32(out, static_cast<uint32_t>(m.dim()));
    put_u32(out, static_cast<uint32_t>(m.rows()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const std::string& id = m.id_at(r);
        if (id.size() > 0xFFFF)
            throw FormatError("id too long for u16 length prefix: '" + id.substr(0, 32) + "...'");
        put_u16(out, static_cast<uint16_t>(id.size()));
        out.append(id);
    }
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (float v : m.row_at(r)) put_f32(out, v);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r(reinterpret_cast<const unsigned char*>(blob.data()), blob.size());
    if (r.bytes(4) != std::string(kMagic, 4))
        throw FormatError("bad magic in '" + path.string() + "'");
    uint16_t version = r.u16();
    if (version != kVersion)
        throw FormatError("unsupported embedding file version " + std::to_string(version));
    uint16_t flags = r.u16();
    uint32_t rows = r.u32();
    uint32_t dim = r.u32();
    if (dim == 0) throw FormatError("embedding file declares dim 0");
    uint32_t id_count = r.u32();
    if (id_count != rows)
        throw FormatError("id table count " + std::to_string(id_count) +
                          " does not match row count " + std::to_string(rows));

    EmbeddingMatrix m(dim, (flags & kFlagNormalized) != 0);
    std::vector<std::string> ids(rows);
    for (auto& id : ids) id = r.bytes(r.u16());
    std::vector<float> buf(dim);
    for (uint32_t row = 0; row < rows; ++row) {
        for (uint32_t i = 0; i < dim; ++i) buf[i] = r.f32();
        m.add_row(ids[row], std::span<const float>(buf));
    }
    if (r.remaining() != 0)
        throw FormatError("trailing bytes after payload in '" + path.string() + "'");
    return m;
}

}  // namespace xlb
