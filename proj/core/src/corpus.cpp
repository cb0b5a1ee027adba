#include "xlb/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "xlb/errors.hpp"

namespace xlb {

namespace {

std::string triple_key(const std::string& group, const std::string& lang, ItemKind kind) {
    std::string k = group;
    k.push_back('\x1f');
    k += lang;
    k.push_back('\x1f');
    k.push_back(kind == ItemKind::Query ? 'q' : 'd');
    return k;
}

std::string triple_name(const std::string& group, const std::string& lang, ItemKind kind) {
    return "(" + group + ", " + lang + ", " + to_string(kind) + ")";
}

}  // namespace

const char* to_string(ItemKind k) { return k == ItemKind::Query ? "query" : "doc"; }

ItemKind item_kind_from_string(const std::string& s) {
    if (s == "query") return ItemKind::Query;
    if (s == "doc") return ItemKind::Document;
    throw ParseError("invalid kind '" + s + "' (expected \"query\" or \"doc\")");
}

void validate_language_tag(const std::string& lang) {
    if (lang.size() != 2 || lang[0] < 'a' || lang[0] > 'z' || lang[1] < 'a' || lang[1] > 'z')
        throw ParseError("invalid language tag '" + lang + "' (want two lowercase letters)");
}

std::string ParallelismIssue::describe() const {
    if (count == 0) return "missing item for " + triple_name(group, lang, kind);
    return std::to_string(count) + " items for " + triple_name(group, lang, kind) +
           ", expected exactly 1";
}

ParallelCorpus ParallelCorpus::from_items(std::vector<CorpusItem> items) {
    std::sort(items.begin(), items.end(), [](const CorpusItem& a, const CorpusItem& b) {
        if (a.group != b.group) return a.group < b.group;
        if (a.lang != b.lang) return a.lang < b.lang;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.id < b.id;
    });

    ParallelCorpus c;
    c.items_ = std::move(items);
    std::set<std::string> langs, groups;
    for (std::size_t i = 0; i < c.items_.size(); ++i) {
        const CorpusItem& it = c.items_[i];
        if (!c.by_id_.emplace(it.id, i).second)
            throw DuplicateItem("duplicate item id '" + it.id + "'");
        c.by_triple_.emplace(triple_key(it.group, it.lang, it.kind), i);
        langs.insert(it.lang);
        groups.insert(it.group);
    }
    c.languages_.assign(langs.begin(), langs.end());
    c.groups_.assign(groups.begin(), groups.end());
    return c;
}

bool ParallelCorpus::has_language(const std::string& lang) const {
    return std::binary_search(languages_.begin(), languages_.end(), lang);
}

bool ParallelCorpus::has_item(const std::string& group, const std::string& lang,
                              ItemKind kind) const {
    return by_triple_.contains(triple_key(group, lang, kind));
}

const CorpusItem& ParallelCorpus::item(const std::string& group, const std::string& lang,
                                       ItemKind kind) const {
    auto it = by_triple_.find(triple_key(group, lang, kind));
    if (it == by_triple_.end())
        throw ParallelismViolation("missing item for " + triple_name(group, lang, kind));
    return items_[it->second];
}

std::vector<const CorpusItem*> ParallelCorpus::queries_of(const std::string& lang) const {
    std::vector<const CorpusItem*> out;
    for (const auto& it : items_)
        if (it.kind == ItemKind::Query && it.lang == lang) out.push_back(&it);
    return out;
}

std::vector<const CorpusItem*> ParallelCorpus::docs_of(const std::string& lang) const {
    std::vector<const CorpusItem*> out;
    for (const auto& it : items_)
        if (it.kind == ItemKind::Document && it.lang == lang) out.push_back(&it);
    return out;
}

const std::string& ParallelCorpus::gold_group(const std::string& group) const {
    auto it = gold_map_.find(group);
    return it == gold_map_.end() ? group : it->second;
}

void ParallelCorpus::set_gold_group(const std::string& group, const std::string& gold) {
    gold_map_[group] = gold;
}

std::vector<ParallelismIssue> validate_parallelism(const ParallelCorpus& corpus) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& it : corpus.items())
        ++counts[triple_key(it.group, it.lang, it.kind)];

    std::vector<ParallelismIssue> issues;
    for (const auto& group : corpus.groups()) {
        for (const auto& lang : corpus.languages()) {
            for (ItemKind kind : {ItemKind::Query, ItemKind::Document}) {
                auto it = counts.find(triple_key(group, lang, kind));
                std::size_t n = it == counts.end() ? 0 : it->second;
                if (n != 1) issues.push_back({group, lang, kind, n});
            }
        }
    }
    return issues;
}

ParallelCorpus load_corpus(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");

    std::vector<CorpusItem> items;
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

        static const char* kKeys[] = {"id", "group", "lang", "kind", "text"};
        for (const char* k : kKeys)
            if (!j.contains(k)) throw fail(std::string("missing key \"") + k + "\"");
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::find_if(std::begin(kKeys), std::end(kKeys),
                             [&](const char* k) { return it.key() == k; }) == std::end(kKeys))
                throw fail("unknown key \"" + it.key() + "\"");
            if (!it.value().is_string()) throw fail("value of \"" + it.key() + "\" is not a string");
        }

        CorpusItem item;
        item.id = j["id"].get<std::string>();
        item.group = j["group"].get<std::string>();
        item.lang = j["lang"].get<std::string>();
        item.text = j["text"].get<std::string>();
        if (item.id.empty()) throw fail("empty id");
        if (item.group.empty()) throw fail("empty group");
        try {
            validate_language_tag(item.lang);
            item.kind = item_kind_from_string(j["kind"].get<std::string>());
        } catch (const ParseError& e) {
            throw fail(e.what());
        }
        items.push_back(std::move(item));
    }

    ParallelCorpus corpus = ParallelCorpus::from_items(std::move(items));
    auto issues = validate_parallelism(corpus);
    if (!issues.empty()) throw ParallelismViolation(issues.front().describe());
    return corpus;
}

void save_corpus(const ParallelCorpus& corpus, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    for (const auto& it : corpus.items()) {
        nlohmann::ordered_json j;
        j["id"] = it.id;
        j["group"] = it.group;
        j["lang"] = it.lang;
        j["kind"] = to_string(it.kind);
        j["text"] = it.text;
        f << j.dump() << '\n';
    }
    if (!f) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace xlb
