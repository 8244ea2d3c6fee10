#include "tokgraft/tokenizer_io.hpp"

#include <algorithm>
#include <sstream>

#include "tokgraft/errors.hpp"
#include "tokgraft/json_util.hpp"

namespace tokgraft {

Vocabulary load_vocab_json(const std::filesystem::path& vocab_path,
                           const std::filesystem::path& added_tokens_path) {
    const nlohmann::json flat = read_json_file(vocab_path);
    if (!flat.is_object()) {
        raise(Errc::invalid_format, vocab_path.string() + ": expected a JSON object");
    }
    std::vector<std::string> strings(flat.size());
    std::vector<bool> is_special(flat.size(), false);
    std::vector<bool> seen(flat.size(), false);
    for (auto it = flat.begin(); it != flat.end(); ++it) {
        if (!it.value().is_number_integer() && !it.value().is_number_unsigned()) {
            raise(Errc::invalid_format, vocab_path.string() + ": id for \"" + it.key() +
                                            "\" is not an integer");
        }
        const std::int64_t id = it.value().get<std::int64_t>();
        if (id < 0 || static_cast<std::size_t>(id) >= flat.size() || seen[id]) {
            raise(Errc::invalid_vocabulary,
                  vocab_path.string() + ": ids must cover 0.." +
                      std::to_string(flat.size() - 1) + " exactly once (bad id " +
                      std::to_string(id) + ")");
        }
        seen[id] = true;
        strings[id] = it.key();
    }

    if (std::filesystem::exists(added_tokens_path)) {
        const nlohmann::json added = read_json_file(added_tokens_path);
        if (!added.is_array()) {
            raise(Errc::invalid_format, added_tokens_path.string() + ": expected a JSON array");
        }
        for (const auto& entry : added) {
            if (!entry.is_object() || !entry.contains("name") || !entry.contains("id")) {
                raise(Errc::invalid_format,
                      added_tokens_path.string() + ": entries need \"name\" and \"id\"");
            }
            const std::string name = entry["name"].get<std::string>();
            const std::int64_t id = entry["id"].get<std::int64_t>();
            if (id < 0 || static_cast<std::size_t>(id) >= strings.size() || strings[id] != name) {
                raise(Errc::invalid_vocabulary, added_tokens_path.string() + ": \"" + name +
                                                    "\" does not match vocab id " +
                                                    std::to_string(id));
            }
            if (entry.value("special", true)) {
                is_special[id] = true;
            }
        }
    }

    return Vocabulary::from_entries(std::move(strings), std::move(is_special), flat.size());
}

MergeTable load_merges_txt(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    MergeTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (line_no == 1 && line.starts_with("#version"))) {
            continue;
        }
        const std::size_t space = line.find(' ');
        if (space == std::string::npos || space == 0 || space + 1 >= line.size() ||
            line.find(' ', space + 1) != std::string::npos) {
            raise(Errc::invalid_format, path.string() + ":" + std::to_string(line_no) +
                                            ": expected \"left right\"");
        }
        table.append(MergeRule{line.substr(0, space), line.substr(space + 1)});
    }
    return table;
}

TokenizerFiles load_tokenizer_dir(const std::filesystem::path& dir) {
    Vocabulary vocab = load_vocab_json(dir / "vocab.json", dir / "added_tokens.json");
    MergeTable merges = load_merges_txt(dir / "merges.txt");
    merges.validate_against(vocab);
    return TokenizerFiles{std::move(vocab), std::move(merges)};
}

void save_tokenizer_dir(const std::filesystem::path& dir, const Vocabulary& vocab,
                        const MergeTable& merges) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    nlohmann::json flat = nlohmann::json::object();
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        flat[vocab.string_of(static_cast<TokenId>(id))] = id;
    }
    write_json_file(dir / "vocab.json", flat);

    nlohmann::json added = nlohmann::json::array();
    auto specials = vocab.specials();
    std::sort(specials.begin(), specials.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& [name, id] : specials) {
        added.push_back({{"name", name}, {"id", id}, {"special", true}});
    }
    write_json_file(dir / "added_tokens.json", added);

    std::string merges_text = "#version: 0.2\n";
    for (const MergeRule& rule : merges.rules()) {
        merges_text += rule.left;
        merges_text += ' ';
        merges_text += rule.right;
        merges_text += '\n';
    }
    write_text_file(dir / "merges.txt", merges_text);
}

const std::vector<std::string>& default_base_specials() {
    static const std::vector<std::string> specials = {
        "<|endoftext|>", "<SOT>",   "<SOTP>",  "<|en|>",        "<|hi|>",
        "<|gu|>",        "<|mr|>",  "<|bn|>",  "<|ta|>",        "<|te|>",
        "<|kn|>",        "<|ml|>",  "<|transcribe|>", "<|translate|>",
        "<|notimestamps|>",
    };
    return specials;
}

std::string fingerprint(const Vocabulary& vocab, const MergeTable& merges) {
    std::string canon;
    canon.reserve(vocab.size() * 16);
    for (std::size_t id = 0; id < vocab.size(); ++id) {
        canon += std::to_string(id);
        canon += '\t';
        canon += vocab.is_special(static_cast<TokenId>(id)) ? "special" : "token";
        canon += '\t';
        canon += vocab.string_of(static_cast<TokenId>(id));
        canon += '\n';
    }
    for (const MergeRule& rule : merges.rules()) {
        canon += "merge\t";
        canon += rule.left;
        canon += '\t';
        canon += rule.right;
        canon += '\n';
    }
    return sha256_hex(canon);
}

}  // namespace tokgraft
