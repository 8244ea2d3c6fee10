#include <string>
#include <vector>

#include "doctest.h"
#include "tokgraft/errors.hpp"
#include "tokgraft/prompt.hpp"
#include "tokgraft/tokenizer_io.hpp"
#include "tokgraft/vocabulary.hpp"

using namespace tokgraft;

namespace {

Vocabulary extended_vocab() {
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    v.append_special("<dra>");
    v.append_special("<indo>");
    return v;
}

std::vector<std::string> names_of(const PromptSequence& p, const Vocabulary& v) {
    std::vector<std::string> out;
    for (TokenId id : p.ids) {
        out.push_back(v.string_of(id));
    }
    return out;
}

}  // namespace

TEST_CASE("default family map groups the eight languages") {
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    CHECK(map.family_of("hi") == "indo");
    CHECK(map.family_of("gu") == "indo");
    CHECK(map.family_of("mr") == "indo");
    CHECK(map.family_of("bn") == "indo");
    CHECK(map.family_of("ta") == "dra");
    CHECK(map.family_of("te") == "dra");
    CHECK(map.family_of("kn") == "dra");
    CHECK(map.family_of("ml") == "dra");
    CHECK(map.prompt_token_of("indo") == "<indo>");
    CHECK(map.prompt_token_of("dra") == "<dra>");
    CHECK(map.prompt_token_names() == std::vector<std::string>{"<dra>", "<indo>"});
    CHECK_THROWS_AS(map.family_of("en"), Error);
}

TEST_CASE("family map loads from json") {
    nlohmann::json j = {{"west", {"aa", "bb"}}, {"east", {"cc"}}};
    LanguageFamilyMap map = LanguageFamilyMap::from_json(j);
    CHECK(map.family_of("aa") == "west");
    CHECK(map.family_of("cc") == "east");
    CHECK(map.prompt_token_of("east") == "<east>");
    CHECK_THROWS_AS(map.family_of("hi"), Error);

    nlohmann::json dup = {{"west", {"aa"}}, {"east", {"aa"}}};
    CHECK_THROWS_AS(LanguageFamilyMap::from_json(dup), Error);
}

TEST_CASE("hindi family prompt matches the golden rendering") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    PromptSequence p = build_prompt("hi", "transcribe", false, v, map, true);
    CHECK(render_prompt(p, v) == "<SOTP><indo><SOT><|hi|><|transcribe|><|notimestamps|>");
    REQUIRE(p.ids.size() == 6);
    CHECK(p.prev_marker == 0);
    CHECK(p.family_prompt == 1);
    CHECK(p.start == 2);
    CHECK(p.language == 3);
    CHECK(p.task == 4);
    CHECK(p.timestamp_flag == 5);
}

TEST_CASE("baseline prompt omits prev and family slots") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    PromptSequence p = build_prompt("ta", "transcribe", true, v, map, false);
    CHECK(render_prompt(p, v) == "<SOT><|ta|><|transcribe|>");
    REQUIRE(p.ids.size() == 3);
    CHECK_FALSE(p.prev_marker.has_value());
    CHECK_FALSE(p.family_prompt.has_value());
    CHECK_FALSE(p.timestamp_flag.has_value());
    CHECK(p.start == 0);
    CHECK(p.language == 1);
    CHECK(p.task == 2);
}

TEST_CASE("baseline prompt keeps notimestamps when timestamps are off") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    PromptSequence p = build_prompt("ta", "transcribe", false, v, map, false);
    CHECK(render_prompt(p, v) == "<SOT><|ta|><|transcribe|><|notimestamps|>");
}

TEST_CASE("same family shares the prompt token across languages") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    PromptSequence ta = build_prompt("ta", "transcribe", false, v, map, true);
    PromptSequence te = build_prompt("te", "transcribe", false, v, map, true);
    PromptSequence hi = build_prompt("hi", "transcribe", false, v, map, true);
    REQUIRE(ta.family_prompt.has_value());
    REQUIRE(te.family_prompt.has_value());
    CHECK(ta.ids[*ta.family_prompt] == te.ids[*te.family_prompt]);
    CHECK(ta.ids[*ta.family_prompt] != hi.ids[*hi.family_prompt]);
    CHECK(ta.ids[*ta.language] != te.ids[*te.language]);
}

TEST_CASE("timestamps on drops the notimestamps token") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    PromptSequence p = build_prompt("ml", "transcribe", true, v, map, true);
    CHECK(render_prompt(p, v) == "<SOTP><dra><SOT><|ml|><|transcribe|>");
    CHECK_FALSE(p.timestamp_flag.has_value());
    auto names = names_of(p, v);
    for (const auto& n : names) {
        CHECK(n != "<|notimestamps|>");
    }
}

TEST_CASE("unknown language is rejected") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    try {
        build_prompt("xx", "transcribe", false, v, map, true);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unknown_language);
        CHECK(std::string(e.what()).find("xx") != std::string::npos);
    }
}

TEST_CASE("only transcribe is supported") {
    Vocabulary v = extended_vocab();
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    try {
        build_prompt("hi", "translate", false, v, map, true);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unsupported_task);
    }
}

TEST_CASE("missing specials are named in the error") {
    // Base vocab without the family specials grafted.
    Vocabulary v = Vocabulary::byte_level_base(default_base_specials());
    LanguageFamilyMap map = LanguageFamilyMap::defaults();
    try {
        build_prompt("hi", "transcribe", false, v, map, true);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::missing_special_token);
        CHECK(std::string(e.what()).find("<indo>") != std::string::npos);
    }
    // Baseline prompts never touch family tokens, so they still work.
    CHECK_NOTHROW(build_prompt("hi", "transcribe", false, v, map, false));
}

TEST_CASE("render rejects unknown ids") {
    Vocabulary v = extended_vocab();
    PromptSequence p;
    p.ids = {static_cast<TokenId>(v.size() + 7)};
    CHECK_THROWS_AS(render_prompt(p, v), Error);
    PromptSequence empty;
    CHECK(render_prompt(empty, v).empty());
}
