#include "tokgraft/extension.hpp"

#include <algorithm>
#include <unordered_map>

#include "tokgraft/errors.hpp"
#include "tokgraft/tokenizer_io.hpp"

namespace tokgraft {

ExtendResult extend_vocabulary(const Vocabulary& base_vocab, const MergeTable& base_merges,
                               std::vector<LearnedExtension> extensions,
                               const std::vector<std::string>& family_prompts) {
    const std::string base_fp = fingerprint(base_vocab, base_merges);
    for (const LearnedExtension& ext : extensions) {
        if (!ext.base_fingerprint.empty() && ext.base_fingerprint != base_fp) {
            raise(Errc::fingerprint_mismatch,
                  "extension for \"" + ext.language + "\" was trained against base " +
                      ext.base_fingerprint + ", this base is " + base_fp);
        }
    }
    std::sort(extensions.begin(), extensions.end(),
              [](const LearnedExtension& a, const LearnedExtension& b) {
                  return a.language < b.language;
              });

    ExtendResult result;
    result.vocab = base_vocab;
    result.merges = base_merges;
    result.manifest.base_fingerprint = base_fp;

    std::unordered_map<std::string, std::size_t> entry_by_token;
    for (const LearnedExtension& ext : extensions) {
        result.manifest.budgets[ext.language] = ext.budget_y;
        result.manifest.materialized[ext.language] = 0;
        if (!ext.corpus_fingerprint.empty()) {
            result.manifest.corpus_fingerprints[ext.language] = ext.corpus_fingerprint;
        }
        for (std::size_t rank = 0; rank < ext.new_merges.size(); ++rank) {
            const MergeRule& rule = ext.new_merges[rank];
            const std::string token = rule.left + rule.right;
            if (!result.vocab.id_of(rule.left) || !result.vocab.id_of(rule.right)) {
                raise(Errc::invalid_vocabulary,
                      "extension for \"" + ext.language + "\" merges unknown token \"" +
                          (result.vocab.id_of(rule.left) ? rule.right : rule.left) + "\"");
            }
            if (result.vocab.id_of(token)) {
                auto it = entry_by_token.find(token);
                if (it == entry_by_token.end()) {
                    // Collides with a base token; the trainer never produces
                    // this, and appending the merge would rewrite base-token
                    // boundaries, so drop it.
                    continue;
                }
                result.manifest.entries[it->second].claimants.push_back(ext.language);
                if (!result.merges.contains(rule)) {
                    result.merges.append(rule);
                }
                continue;
            }
            const TokenId id = result.vocab.append_token(token);
            result.merges.append(rule);
            ManifestEntry entry;
            entry.token = token;
            entry.id = id;
            entry.language = ext.language;
            entry.source_rank = static_cast<std::int64_t>(rank);
            entry.claimants.push_back(ext.language);
            entry_by_token[token] = result.manifest.entries.size();
            result.manifest.entries.push_back(std::move(entry));
            ++result.manifest.materialized[ext.language];
        }
    }

    for (const std::string& name : family_prompts) {
        const TokenId id = result.vocab.append_special(name);
        result.manifest.family_prompt_tokens.push_back(FamilyPromptToken{name, id});
    }

    result.vocab.validate();
    result.merges.validate_against(result.vocab);
    result.manifest.extended_fingerprint = fingerprint(result.vocab, result.merges);
    return result;
}

nlohmann::json manifest_to_json(const ExtensionManifest& manifest) {
    nlohmann::json entries = nlohmann::json::array();
    for (const ManifestEntry& e : manifest.entries) {
        entries.push_back({
            {"token", e.token},
            {"id", e.id},
            {"language", e.language},
            {"source_rank", e.source_rank},
            {"claimants", e.claimants},
        });
    }
    nlohmann::json prompts = nlohmann::json::array();
    for (const FamilyPromptToken& t : manifest.family_prompt_tokens) {
        prompts.push_back({{"name", t.name}, {"id", t.id}});
    }

    // budget_y is the common per-language budget when there is one.
    nlohmann::json budget_y;
    if (!manifest.budgets.empty()) {
        const std::int64_t first = manifest.budgets.begin()->second;
        const bool uniform =
            std::all_of(manifest.budgets.begin(), manifest.budgets.end(),
                        [&](const auto& kv) { return kv.second == first; });
        if (uniform) {
            budget_y = first;
        }
    }

    return {
        {"base_fingerprint", manifest.base_fingerprint},
        {"extended_fingerprint", manifest.extended_fingerprint},
        {"budget_y", budget_y},
        {"budgets", manifest.budgets},
        {"materialized", manifest.materialized},
        {"corpus_fingerprints", manifest.corpus_fingerprints},
        {"entries", entries},
        {"family_prompt_tokens", prompts},
    };
}

}  // namespace tokgraft
