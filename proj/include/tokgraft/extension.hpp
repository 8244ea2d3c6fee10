#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokgraft/trainer.hpp"
#include "tokgraft/vocabulary.hpp"

namespace tokgraft {

struct ManifestEntry {
    std::string token;
    TokenId id = -1;
    std::string language;             // first claimant, owns the id
    std::int64_t source_rank = -1;    // learned rank within that language
    std::vector<std::string> claimants;
};

struct FamilyPromptToken {
    std::string name;
    TokenId id = -1;
};

struct ExtensionManifest {
    std::string base_fingerprint;
    std::string extended_fingerprint;
    std::vector<ManifestEntry> entries;
    std::vector<FamilyPromptToken> family_prompt_tokens;
    // Requested budget per language and the unique tokens each actually got.
    std::map<std::string, std::int64_t> budgets;
    std::map<std::string, std::int64_t> materialized;
    std::map<std::string, std::string> corpus_fingerprints;
};

struct ExtendResult {
    Vocabulary vocab;
    MergeTable merges;
    ExtensionManifest manifest;
};

// Grafts the learned extensions onto the frozen base: new merges appended
// after all base merges, ordered by language code then learned rank; token
// strings duplicated across languages keep the first language's id; family
// prompt specials take the final ids.
ExtendResult extend_vocabulary(const Vocabulary& base_vocab, const MergeTable& base_merges,
                               std::vector<LearnedExtension> extensions,
                               const std::vector<std::string>& family_prompts);

nlohmann::json manifest_to_json(const ExtensionManifest& manifest);

}  // namespace tokgraft
