#pragma once

#include <string>
#include <vector>

#include "xlb/corpus.hpp"

namespace xlb {

// Multi:     pool has every document of both languages, both same-group
//            documents are gold.
// Multi1:    Multi pool minus the gold document in the query's language;
//            the single gold is the opposite-language document.
// MonoSame:  documents of the query's language only.
// MonoCross: documents of the other language only.
enum class ScenarioKind { Multi, Multi1, MonoSame, MonoCross };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Multi;
    std::string query_lang;
    std::vector<std::string> doc_langs;
};

// Structural validity only (language counts and membership). Corpus
// knowledge is limited to which languages exist.
void validate_scenario(const ScenarioSpec& spec, const ParallelCorpus& corpus);

struct EvalInstance {
    std::string query_id;
    std::string group;
    std::vector<std::string> pool;  // doc ids, normalized (group, lang) order
    std::vector<std::string> gold;  // subset of pool, sorted
};

// One instance per query of spec.query_lang, ordered by group id. Purely
// structural: embeddings are never consulted.
std::vector<EvalInstance> build_scenario(const ParallelCorpus& corpus,
                                         const ScenarioSpec& spec);

}  // namespace xlb
