#include "tokgraft/prompt.hpp"

#include "tokgraft/errors.hpp"

namespace tokgraft {

LanguageFamilyMap LanguageFamilyMap::defaults() {
    return from_json({
        {"indo", {"hi", "gu", "mr", "bn"}},
        {"dra", {"ta", "te", "kn", "ml"}},
    });
}

LanguageFamilyMap LanguageFamilyMap::from_json(const nlohmann::json& families) {
    if (!families.is_object()) {
        raise(Errc::invalid_format, "families config must be an object of family -> [languages]");
    }
    LanguageFamilyMap map;
    for (auto it = families.begin(); it != families.end(); ++it) {
        const std::string& family = it.key();
        if (!it.value().is_array()) {
            raise(Errc::invalid_format, "family \"" + family + "\" must list its languages");
        }
        map.prompt_tokens_[family] = "<" + family + ">";
        for (const auto& lang : it.value()) {
            const std::string code = lang.get<std::string>();
            auto [pos, inserted] = map.assignments_.emplace(code, family);
            if (!inserted) {
                raise(Errc::invalid_format, "language \"" + code +
                                                "\" assigned to both \"" + pos->second +
                                                "\" and \"" + family + "\"");
            }
        }
    }
    return map;
}

const std::string& LanguageFamilyMap::family_of(const std::string& language) const {
    auto it = assignments_.find(language);
    if (it == assignments_.end()) {
        raise(Errc::unknown_language, "unknown language \"" + language + "\"");
    }
    return it->second;
}

const std::string& LanguageFamilyMap::prompt_token_of(const std::string& family) const {
    auto it = prompt_tokens_.find(family);
    if (it == prompt_tokens_.end()) {
        raise(Errc::unknown_language, "unknown family \"" + family + "\"");
    }
    return it->second;
}

std::vector<std::string> LanguageFamilyMap::prompt_token_names() const {
    std::vector<std::string> names;
    names.reserve(prompt_tokens_.size());
    for (const auto& [family, name] : prompt_tokens_) {
        names.push_back(name);
    }
    return names;
}

namespace {

TokenId require_special(const Vocabulary& vocab, const std::string& name) {
    if (auto id = vocab.special_id(name)) {
        return *id;
    }
    raise(Errc::missing_special_token, "vocabulary lacks special token \"" + name + "\"");
}

}  // namespace

PromptSequence build_prompt(const std::string& language, const std::string& task,
                            bool timestamps, const Vocabulary& vocab,
                            const LanguageFamilyMap& map, bool use_family_prompt) {
    if (task != "transcribe") {
        raise(Errc::unsupported_task, "unsupported task \"" + task + "\" (only transcribe)");
    }
    const std::string& family = map.family_of(language);

    PromptSequence p;
    if (use_family_prompt) {
        p.prev_marker = p.ids.size();
        p.ids.push_back(require_special(vocab, "<SOTP>"));
        p.family_prompt = p.ids.size();
        p.ids.push_back(require_special(vocab, map.prompt_token_of(family)));
    }
    p.start = p.ids.size();
    p.ids.push_back(require_special(vocab, "<SOT>"));
    p.language = p.ids.size();
    p.ids.push_back(require_special(vocab, "<|" + language + "|>"));
    p.task = p.ids.size();
    p.ids.push_back(require_special(vocab, "<|transcribe|>"));
    if (!timestamps) {
        p.timestamp_flag = p.ids.size();
        p.ids.push_back(require_special(vocab, "<|notimestamps|>"));
    }
    return p;
}

std::string render_prompt(const PromptSequence& prompt, const Vocabulary& vocab) {
    std::string out;
    for (TokenId id : prompt.ids) {
        if (!vocab.contains(id)) {
            raise(Errc::unknown_token_id, "prompt id " + std::to_string(id) +
                                              " is not in the vocabulary");
        }
        out += vocab.string_of(id);
    }
    return out;
}

}  // namespace tokgraft
