#include "xlb/scenario.hpp"

#include <algorithm>

#include "xlb/errors.hpp"

namespace xlb {

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Multi: return "multi";
        case ScenarioKind::Multi1: return "multi1";
        case ScenarioKind::MonoSame: return "mono-same";
        case ScenarioKind::MonoCross: return "mono-cross";
    }
    return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "multi") return ScenarioKind::Multi;
    if (s == "multi1") return ScenarioKind::Multi1;
    if (s == "mono-same") return ScenarioKind::MonoSame;
    if (s == "mono-cross") return ScenarioKind::MonoCross;
    throw InvalidConfig("unknown scenario kind '" + s + "'");
}

void validate_scenario(const ScenarioSpec& spec, const ParallelCorpus& corpus) {
    if (!corpus.has_language(spec.query_lang))
        throw LanguageNotInCorpus("query language '" + spec.query_lang + "' not in corpus");
    for (const auto& l : spec.doc_langs)
        if (!corpus.has_language(l))
            throw LanguageNotInCorpus("document language '" + l + "' not in corpus");

    auto in_doc_langs = [&](const std::string& l) {
        return std::find(spec.doc_langs.begin(), spec.doc_langs.end(), l) !=
               spec.doc_langs.end();
    };
    switch (spec.kind) {
        case ScenarioKind::Multi:
        case ScenarioKind::Multi1:
            if (spec.doc_langs.size() != 2 || spec.doc_langs[0] == spec.doc_langs[1])
                throw InvalidConfig(std::string(to_string(spec.kind)) +
                                    " needs exactly two distinct document languages");
            if (!in_doc_langs(spec.query_lang))
                throw InvalidConfig(std::string(to_string(spec.kind)) +
                                    " requires the query language among document languages");
            break;
        case ScenarioKind::MonoSame:
            if (spec.doc_langs.size() != 1 || spec.doc_langs[0] != spec.query_lang)
                throw InvalidConfig("mono-same requires doc_langs == [query_lang]");
            break;
        case ScenarioKind::MonoCross:
            if (spec.doc_langs.size() != 1 || spec.doc_langs[0] == spec.query_lang)
                throw InvalidConfig(
                    "mono-cross requires a single document language different from the "
                    "query language");
            break;
    }
}

std::vector<EvalInstance> build_scenario(const ParallelCorpus& corpus,
                                         const ScenarioSpec& spec) {
    validate_scenario(spec, corpus);

    auto lang_in_pool = [&](const std::string& l) {
        return std::find(spec.doc_langs.begin(), spec.doc_langs.end(), l) !=
               spec.doc_langs.end();
    };
    // Shared pool in normalized (group, lang) order; corpus items are
    // already sorted that way.
    std::vector<std::string> base_pool;
    for (const auto& it : corpus.items())
        if (it.kind == ItemKind::Document && lang_in_pool(it.lang))
            base_pool.push_back(it.id);

    std::vector<EvalInstance> instances;
    for (const CorpusItem* q : corpus.queries_of(spec.query_lang)) {
        const std::string& gg = corpus.gold_group(q->group);
        EvalInstance inst;
        inst.query_id = q->id;
        inst.group = q->group;

        if (spec.kind == ScenarioKind::Multi) {
            inst.pool = base_pool;
            for (const auto& l : spec.doc_langs)
                inst.gold.push_back(corpus.item(gg, l, ItemKind::Document).id);
        } else if (spec.kind == ScenarioKind::Multi1) {
            const std::string& drop =
                corpus.item(gg, spec.query_lang, ItemKind::Document).id;
            inst.pool.reserve(base_pool.size() - 1);
            for (const auto& id : base_pool)
                if (id != drop) inst.pool.push_back(id);
            const std::string& other =
                spec.doc_langs[0] == spec.query_lang ? spec.doc_langs[1] : spec.doc_langs[0];
            inst.gold.push_back(corpus.item(gg, other, ItemKind::Document).id);
        } else {
            inst.pool = base_pool;
            inst.gold.push_back(corpus.item(gg, spec.doc_langs[0], ItemKind::Document).id);
        }
        std::sort(inst.gold.begin(), inst.gold.end());
        instances.push_back(std::move(inst));
    }
    return instances;
}

}  // namespace xlb
