#include "tokgraft/vocabulary.hpp"

#include "tokgraft/errors.hpp"
#include "tokgraft/unicode.hpp"

namespace tokgraft {

ByteSymbolMap::ByteSymbolMap() {
    inverse_.fill(-1);
    auto printable = [](int b) {
        return (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    int next = 0;
    for (int b = 0; b < 256; ++b) {
        const std::uint32_t cp = printable(b) ? static_cast<std::uint32_t>(b)
                                              : static_cast<std::uint32_t>(256 + next++);
        forward_[b] = cp;
        std::string utf8;
        uni::append_utf8(utf8, cp);
        forward_utf8_[b] = std::move(utf8);
        inverse_[cp] = static_cast<std::int16_t>(b);
    }
}

std::optional<std::uint8_t> ByteSymbolMap::byte_for(std::uint32_t cp) const {
    if (cp >= inverse_.size() || inverse_[cp] < 0) {
        return std::nullopt;
    }
    return static_cast<std::uint8_t>(inverse_[cp]);
}

std::string ByteSymbolMap::bytes_to_symbols(std::string_view bytes) const {
    std::string out;
    out.reserve(bytes.size() * 2);
    for (char c : bytes) {
        out += forward_utf8_[static_cast<std::uint8_t>(c)];
    }
    return out;
}

std::optional<std::string> ByteSymbolMap::symbols_to_bytes(std::string_view symbols) const {
    std::string out;
    out.reserve(symbols.size());
    std::size_t pos = 0;
    std::uint32_t cp;
    while (pos < symbols.size()) {
        std::size_t n = uni::decode_utf8(symbols, pos, cp);
        if (n == 0) {
            return std::nullopt;
        }
        auto byte = byte_for(cp);
        if (!byte) {
            return std::nullopt;
        }
        out.push_back(static_cast<char>(*byte));
        pos += n;
    }
    return out;
}

Vocabulary Vocabulary::from_entries(std::vector<std::string> strings,
                                    std::vector<bool> is_special,
                                    std::size_t base_size) {
    if (strings.size() != is_special.size()) {
        raise(Errc::invalid_vocabulary, "entries and special flags differ in length");
    }
    Vocabulary v;
    v.strings_ = std::move(strings);
    v.special_ = std::move(is_special);
    v.base_size_ = base_size;
    v.index_.reserve(v.strings_.size());
    for (std::size_t i = 0; i < v.strings_.size(); ++i) {
        v.index_.emplace(v.strings_[i], static_cast<TokenId>(i));
    }
    v.validate();
    return v;
}

Vocabulary Vocabulary::byte_level_base(const std::vector<std::string>& specials) {
    ByteSymbolMap bytes;
    std::vector<std::string> strings;
    std::vector<bool> flags;
    strings.reserve(256 + specials.size());
    for (int b = 0; b < 256; ++b) {
        strings.push_back(bytes.symbol_utf8(static_cast<std::uint8_t>(b)));
        flags.push_back(false);
    }
    for (const auto& name : specials) {
        strings.push_back(name);
        flags.push_back(true);
    }
    return from_entries(std::move(strings), std::move(flags), 256 + specials.size());
}

std::optional<TokenId> Vocabulary::id_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<TokenId> Vocabulary::special_id(std::string_view name) const {
    auto id = id_of(name);
    if (id && special_[*id]) {
        return id;
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, TokenId>> Vocabulary::specials() const {
    std::vector<std::pair<std::string, TokenId>> out;
    for (std::size_t i = 0; i < strings_.size(); ++i) {
        if (special_[i]) {
            out.emplace_back(strings_[i], static_cast<TokenId>(i));
        }
    }
    return out;
}

TokenId Vocabulary::append_token(std::string token) {
    if (index_.count(token)) {
        raise(Errc::invalid_vocabulary, "duplicate token string: " + token);
    }
    const auto id = static_cast<TokenId>(strings_.size());
    index_.emplace(token, id);
    strings_.push_back(std::move(token));
    special_.push_back(false);
    return id;
}

TokenId Vocabulary::append_special(std::string name) {
    if (index_.count(name)) {
        raise(Errc::duplicate_special_name, "special name already taken: " + name);
    }
    const auto id = static_cast<TokenId>(strings_.size());
    index_.emplace(name, id);
    strings_.push_back(std::move(name));
    special_.push_back(true);
    return id;
}

void Vocabulary::validate() const {
    if (base_size_ > strings_.size()) {
        raise(Errc::invalid_vocabulary, "base_size exceeds token count");
    }
    if (index_.size() != strings_.size()) {
        // Dense ids are structural (vector index), so the only way to break
        // bijectivity is a repeated string.
        raise(Errc::invalid_vocabulary, "duplicate token strings in vocabulary");
    }
    for (std::size_t i = 0; i < strings_.size(); ++i) {
        auto it = index_.find(strings_[i]);
        if (it == index_.end() || it->second != static_cast<TokenId>(i)) {
            raise(Errc::invalid_vocabulary, "inconsistent token index");
        }
    }
}

MergeTable::MergeTable(std::vector<MergeRule> rules) {
    rules_.reserve(rules.size());
    for (auto& r : rules) {
        append(std::move(r));
    }
}

std::string MergeTable::key(const MergeRule& rule) {
    std::string k;
    k.reserve(rule.left.size() + rule.right.size() + 1);
    k += rule.left;
    k.push_back('\x01');
    k += rule.right;
    return k;
}

bool MergeTable::contains(const MergeRule& rule) const {
    return rank_index_.count(key(rule)) != 0;
}

void MergeTable::append(MergeRule rule) {
    auto [it, inserted] = rank_index_.emplace(key(rule), rules_.size());
    if (!inserted) {
        raise(Errc::invalid_format,
              "duplicate merge rule: " + rule.left + " " + rule.right);
    }
    rules_.push_back(std::move(rule));
}

void MergeTable::validate_against(const Vocabulary& vocab) const {
    for (const auto& r : rules_) {
        if (!vocab.id_of(r.left + r.right)) {
            raise(Errc::invalid_vocabulary,
                  "merge rule result not in vocabulary: " + r.left + " " + r.right);
        }
    }
}

}  // namespace tokgraft
