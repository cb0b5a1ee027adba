#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace xlb {

enum class ItemKind { Query, Document };

const char* to_string(ItemKind k);
ItemKind item_kind_from_string(const std::string& s);

// Lowercase two-letter code ("en", "zh", ...). Throws ParseError otherwise.
void validate_language_tag(const std::string& lang);

struct CorpusItem {
    std::string id;
    std::string group;
    std::string lang;
    ItemKind kind;
    std::string text;
};

struct ParallelismIssue {
    std::string group;
    std::string lang;
    ItemKind kind;
    std::size_t count;  // items found for the triple; 1 is required
    std::string describe() const;
};

// A fully parallel corpus: for every (group, lang) there is exactly one
// query and one document. Items are kept in normalized (group, lang, kind)
// order so downstream construction and serialization are deterministic.
class ParallelCorpus {
public:
    // Normalizes order, indexes ids and triples. Throws DuplicateItem on a
    // repeated id. Parallelism is NOT enforced here (validate separately);
    // group-to-gold-group mapping defaults to identity.
    static ParallelCorpus from_items(std::vector<CorpusItem> items);

    const std::vector<CorpusItem>& items() const noexcept { return items_; }
    const std::vector<std::string>& languages() const noexcept { return languages_; }
    const std::vector<std::string>& groups() const noexcept { return groups_; }

    bool has_language(const std::string& lang) const;

    // Exactly-one lookups; throw MissingEmbedding-like errors are not right
    // here, so a failed lookup throws ParallelismViolation naming the triple.
    const CorpusItem& item(const std::string& group, const std::string& lang,
                           ItemKind kind) const;
    bool has_item(const std::string& group, const std::string& lang, ItemKind kind) const;

    // Queries of one language, ordered by group id.
    std::vector<const CorpusItem*> queries_of(const std::string& lang) const;
    std::vector<const CorpusItem*> docs_of(const std::string& lang) const;

    // Group whose documents are gold for queries of `group` (identity unless
    // overridden).
    const std::string& gold_group(const std::string& group) const;
    void set_gold_group(const std::string& group, const std::string& gold);

private:
    std::vector<CorpusItem> items_;
    std::vector<std::string> languages_;
    std::vector<std::string> groups_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_triple_;
    std::unordered_map<std::string, std::string> gold_map_;
};

std::vector<ParallelismIssue> validate_parallelism(const ParallelCorpus& corpus);

// NDJSON, one object per line with exactly the keys
// {"id","group","lang","kind","text"}; kind is "query" or "doc". Unknown or
// missing keys, non-string values, bad tags and duplicate ids are rejected
// with 1-based line numbers. A corpus that parses but is not fully parallel
// raises ParallelismViolation naming the first offending triple.
ParallelCorpus load_corpus(const std::filesystem::path& path);

// Writes normalized order with a fixed key order; save-then-load-then-save
// is byte-identical.
void save_corpus(const ParallelCorpus& corpus, const std::filesystem::path& path);

}  // namespace xlb
