#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tokgraft/vocabulary.hpp"

namespace tokgraft {

// Language -> family assignments plus the prompt token each family uses
// ("indo" -> "<indo>").
class LanguageFamilyMap {
public:
    static LanguageFamilyMap defaults();
    // {"indo": ["hi","gu","mr","bn"], "dra": ["ta","te","kn","ml"]}
    static LanguageFamilyMap from_json(const nlohmann::json& families);

    const std::string& family_of(const std::string& language) const;  // UnknownLanguage
    const std::string& prompt_token_of(const std::string& family) const;

    const std::map<std::string, std::string>& assignments() const { return assignments_; }
    std::vector<std::string> prompt_token_names() const;

private:
    std::map<std::string, std::string> assignments_;    // language -> family
    std::map<std::string, std::string> prompt_tokens_;  // family -> token name
};

struct PromptSequence {
    std::vector<TokenId> ids;
    // Indices into ids for each named slot; unset when the slot is absent.
    std::optional<std::size_t> prev_marker;
    std::optional<std::size_t> family_prompt;
    std::optional<std::size_t> start;
    std::optional<std::size_t> language;
    std::optional<std::size_t> task;
    std::optional<std::size_t> timestamp_flag;
};

// Layout with the family prompt on: <SOTP>, <family>, <SOT>, <|lang|>,
// <|transcribe|>, and <|notimestamps|> unless timestamps are requested.
// With it off, the baseline prefix starting at <SOT>. Only the transcribe
// task is supported.
PromptSequence build_prompt(const std::string& language, const std::string& task,
                            bool timestamps, const Vocabulary& vocab,
                            const LanguageFamilyMap& map, bool use_family_prompt);

std::string render_prompt(const PromptSequence& prompt, const Vocabulary& vocab);

}  // namespace tokgraft
