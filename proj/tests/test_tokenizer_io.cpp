#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "tokgraft/errors.hpp"
#include "tokgraft/json_util.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/vocabulary.hpp"

using namespace tokgraft;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("tokgraft_io_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TokenizerFiles sample_tokenizer() {
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    MergeTable m;
    v.append_token("ab");
    m.append({"a", "b"});
    v.append_token("abab");
    m.append({"ab", "ab"});
    v.append_token("\xC4\xA0th");
    m.append({"\xC4\xA0t", "h"});  // concatenation must exist in the vocab
    return {std::move(v), std::move(m)};
}

}  // namespace

TEST_CASE("save then load preserves vocab, merges and fingerprint") {
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    MergeTable m;
    v.append_token("ab");
    m.append({"a", "b"});
    v.append_token("\xC4\xA0t");
    m.append({"\xC4\xA0", "t"});
    std::string fp = fingerprint(v, m);

    fs::path dir = temp_dir("roundtrip");
    save_tokenizer_dir(dir, v, m);
    CHECK(fs::exists(dir / "vocab.json"));
    CHECK(fs::exists(dir / "merges.txt"));
    CHECK(fs::exists(dir / "added_tokens.json"));

    TokenizerFiles loaded = load_tokenizer_dir(dir);
    CHECK(loaded.vocab.size() == v.size());
    CHECK(loaded.merges.size() == m.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto id = static_cast<TokenId>(i);
        CHECK(loaded.vocab.string_of(id) == v.string_of(id));
        CHECK(loaded.vocab.is_special(id) == v.is_special(id));
    }
    CHECK(fingerprint(loaded.vocab, loaded.merges) == fp);
}

TEST_CASE("vocab json load is key order independent") {
    fs::path dir = temp_dir("keyorder");
    write_text_file(dir / "vocab.json", "{\"b\": 1, \"a\": 0, \"c\": 2}\n");
    write_text_file(dir / "added_tokens.json", "[]\n");
    Vocabulary v = load_vocab_json(dir / "vocab.json", dir / "added_tokens.json");
    CHECK(v.size() == 3);
    CHECK(v.string_of(0) == "a");
    CHECK(v.string_of(1) == "b");
    CHECK(v.string_of(2) == "c");
}

TEST_CASE("vocab json rejects sparse or duplicate ids") {
    fs::path dir = temp_dir("sparse");
    write_text_file(dir / "vocab.json", "{\"a\": 0, \"b\": 2}\n");
    write_text_file(dir / "added_tokens.json", "[]\n");
    CHECK_THROWS_AS(load_vocab_json(dir / "vocab.json", dir / "added_tokens.json"), Error);

    write_text_file(dir / "vocab.json", "{\"a\": 0, \"b\": 0}\n");
    CHECK_THROWS_AS(load_vocab_json(dir / "vocab.json", dir / "added_tokens.json"), Error);
}

TEST_CASE("added tokens must match vocab entries") {
    fs::path dir = temp_dir("added");
    write_text_file(dir / "vocab.json", "{\"a\": 0, \"<X>\": 1}\n");
    write_text_file(dir / "added_tokens.json",
                    "[{\"name\": \"<X>\", \"id\": 1, \"special\": true}]\n");
    Vocabulary v = load_vocab_json(dir / "vocab.json", dir / "added_tokens.json");
    CHECK(v.is_special(1));
    CHECK_FALSE(v.is_special(0));

    write_text_file(dir / "added_tokens.json",
                    "[{\"name\": \"<Y>\", \"id\": 1, \"special\": true}]\n");
    CHECK_THROWS_AS(load_vocab_json(dir / "vocab.json", dir / "added_tokens.json"), Error);
}

TEST_CASE("merges txt skips version header and blank lines") {
    fs::path dir = temp_dir("merges");
    write_text_file(dir / "merges.txt", "#version: 0.2\na b\n\nab ab\n");
    MergeTable m = load_merges_txt(dir / "merges.txt");
    REQUIRE(m.size() == 2);
    CHECK(m.rule(0) == MergeRule{"a", "b"});
    CHECK(m.rule(1) == MergeRule{"ab", "ab"});
}

TEST_CASE("merges txt rejects malformed lines") {
    fs::path dir = temp_dir("badmerges");
    write_text_file(dir / "merges.txt", "a b c\n");
    CHECK_THROWS_AS(load_merges_txt(dir / "merges.txt"), Error);
    write_text_file(dir / "merges.txt", "nospace\n");
    CHECK_THROWS_AS(load_merges_txt(dir / "merges.txt"), Error);
}

TEST_CASE("missing files raise io errors") {
    fs::path dir = temp_dir("missing");
    CHECK_THROWS_AS(load_tokenizer_dir(dir / "nope"), Error);
    try {
        load_merges_txt(dir / "absent.txt");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::io_error);
        CHECK(std::string(e.what()).find("absent.txt") != std::string::npos);
    }
}

TEST_CASE("fingerprint tracks content not formatting") {
    TokenizerFiles a = sample_tokenizer();
    TokenizerFiles b = sample_tokenizer();
    CHECK(fingerprint(a.vocab, a.merges) == fingerprint(b.vocab, b.merges));
    CHECK(fingerprint(a.vocab, a.merges).size() == 64);  // hex sha-256

    b.vocab.append_token("zz");
    CHECK(fingerprint(a.vocab, a.merges) != fingerprint(b.vocab, b.merges));

    TokenizerFiles c = sample_tokenizer();
    MergeTable fewer;
    fewer.append({"a", "b"});
    CHECK(fingerprint(c.vocab, c.merges) != fingerprint(c.vocab, fewer));
}

TEST_CASE("saved files end with newline and carry the version header") {
    TokenizerFiles t = sample_tokenizer();
    fs::path dir = temp_dir("format");
    save_tokenizer_dir(dir, t.vocab, t.merges);
    std::string merges = read_text_file(dir / "merges.txt");
    CHECK(merges.rfind("#version: 0.2\n", 0) == 0);
    CHECK(merges.back() == '\n');
    std::string vocab = read_text_file(dir / "vocab.json");
    CHECK(vocab.back() == '\n');
}
