#include "xlb/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"

namespace xlb {

namespace {

double dot_f32(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

}  // namespace

Ranking rank(const std::string& query_id, const std::vector<std::string>& pool,
             const EmbeddingMatrix& emb) {
    if (!emb.normalized())
        throw NotNormalized("retrieval requires an L2-normalized embedding matrix");
    if (pool.empty()) throw EmptyPool("empty candidate pool for query '" + query_id + "'");

    auto q = emb.row(query_id);
    Ranking r;
    r.query_id = query_id;
    r.entries.reserve(pool.size());
    for (const auto& doc_id : pool)
        r.entries.push_back({doc_id, dot_f32(q, emb.row(doc_id))});

    std::sort(r.entries.begin(), r.entries.end(), [](const RankedDoc& a, const RankedDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    return r;
}

std::vector<Ranking> retrieve_all(const std::vector<EvalInstance>& instances,
                                  const EmbeddingMatrix& emb, unsigned threads) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, instances.empty() ? 1 : instances.size());

    std::vector<Ranking> out(instances.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < instances.size(); ++i)
            out[i] = rank(instances[i].query_id, instances[i].pool, emb);
        return out;
    }

    std::vector<std::thread> workers;
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < instances.size(); i += threads)
                    out[i] = rank(instances[i].query_id, instances[i].pool, emb);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

void write_rankings(const std::vector<Ranking>& rankings,
                    const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& r : rankings) {
        nlohmann::ordered_json j;
        j["query_id"] = r.query_id;
        auto arr = nlohmann::ordered_json::array();
        for (const auto& e : r.entries)
            arr.push_back(nlohmann::ordered_json::array({e.doc_id, e.score}));
        j["ranking"] = std::move(arr);
        f << j.dump() << '\n';
    }
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace xlb
