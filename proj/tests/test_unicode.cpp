#include <string>
#include <vector>

#include "doctest.h"
#include "tokgraft/errors.hpp"
#include "tokgraft/unicode.hpp"

using namespace tokgraft;

TEST_CASE("utf8 decode basics") {
    std::string s = "a\xC3\xA9\xE0\xA4\x95\xF0\x9F\x98\x80";  // a é क 😀
    std::size_t pos = 0;
    std::uint32_t cp = 0;
    CHECK(uni::decode_utf8(s, pos, cp) == 1);
    CHECK(cp == U'a');
    pos += 1;
    CHECK(uni::decode_utf8(s, pos, cp) == 2);
    CHECK(cp == 0xE9);
    pos += 2;
    CHECK(uni::decode_utf8(s, pos, cp) == 3);
    CHECK(cp == 0x915);
    pos += 3;
    CHECK(uni::decode_utf8(s, pos, cp) == 4);
    CHECK(cp == 0x1F600);
}

TEST_CASE("utf8 rejects malformed sequences") {
    CHECK(uni::is_valid_utf8("plain ascii"));
    CHECK(uni::is_valid_utf8("\xE0\xA4\x95"));
    CHECK_FALSE(uni::is_valid_utf8("\xFF"));
    CHECK_FALSE(uni::is_valid_utf8("\xC3"));                  // truncated
    CHECK_FALSE(uni::is_valid_utf8("\xC0\xAF"));              // overlong
    CHECK_FALSE(uni::is_valid_utf8("\xED\xA0\x80"));          // surrogate
    CHECK_FALSE(uni::is_valid_utf8("\x80"));                  // stray continuation
    CHECK_FALSE(uni::is_valid_utf8("\xF4\x90\x80\x80"));      // > U+10FFFF
    CHECK_THROWS_AS(uni::to_codepoints("\xFF"), Error);
}

TEST_CASE("utf8 roundtrip through codepoints") {
    std::string s = "mix: é क्क தமிழ் 😀";
    auto cps = uni::to_codepoints(s);
    CHECK(uni::encode_utf8(cps) == s);
}

TEST_CASE("category queries") {
    CHECK(uni::is_letter(U'a'));
    CHECK(uni::is_letter(0x915));   // क
    CHECK(uni::is_letter(0x0BAE));  // ம
    CHECK(uni::is_mark(0x093E));    // ा matra
    CHECK(uni::is_mark(0x094D));    // virama
    CHECK(uni::is_mark(0x0301));    // combining acute
    CHECK_FALSE(uni::is_mark(U'a'));
    CHECK(uni::is_number(U'7'));
    CHECK(uni::is_number(0x0966));  // Devanagari zero
    CHECK(uni::is_space(U' '));
    CHECK(uni::is_space(U'\n'));
    CHECK_FALSE(uni::is_space(U'x'));
}

TEST_CASE("nfc composes e + combining acute") {
    std::string decomposed = "e\xCC\x81";  // e + U+0301
    std::string composed = "\xC3\xA9";     // é
    CHECK(uni::to_nfc(decomposed) == composed);
    CHECK(uni::to_nfc(composed) == composed);
}

TEST_CASE("nfc decomposes composition exclusions") {
    // U+0958 (qa) is a composition exclusion: NFC leaves it decomposed.
    std::string precomposed = "\xE0\xA5\x98";              // क़ U+0958
    std::string decomposed = "\xE0\xA4\x95\xE0\xA4\xBC";   // क + nukta
    CHECK(uni::to_nfc(precomposed) == decomposed);
    CHECK(uni::to_nfc(decomposed) == decomposed);
}

TEST_CASE("nfc reorders combining marks by class") {
    // nukta (ccc 7) must sort before virama (ccc 9).
    std::vector<std::uint32_t> wrong = {0x915, 0x94D, 0x93C};
    std::vector<std::uint32_t> right = {0x915, 0x93C, 0x94D};
    CHECK(uni::to_nfc(uni::encode_utf8(wrong)) == uni::encode_utf8(right));
    CHECK(uni::to_nfc(uni::encode_utf8(right)) == uni::encode_utf8(right));
}

TEST_CASE("nfc composes hangul") {
    std::vector<std::uint32_t> jamo = {0x1100, 0x1161, 0x11A8};  // g + a + k
    std::string syllable = uni::encode_utf8({0xAC01});      // 각
    CHECK(uni::to_nfc(uni::encode_utf8(jamo)) == syllable);
    CHECK(uni::to_nfc(syllable) == syllable);
}

TEST_CASE("nfc is identity on ascii and stable on devanagari text") {
    std::string ascii = "Hello, world! 123";
    CHECK(uni::to_nfc(ascii) == ascii);
    std::string hindi = "\xE0\xA4\x95\xE0\xA5\x8D\xE0\xA4\x95\xE0\xA4\xBE";  // क्का
    CHECK(uni::to_nfc(hindi) == hindi);
    CHECK(uni::to_nfc(uni::to_nfc(hindi)) == uni::to_nfc(hindi));
}

TEST_CASE("combining class values") {
    CHECK(uni::combining_class(U'a') == 0);
    CHECK(uni::combining_class(0x93C) == 7);
    CHECK(uni::combining_class(0x94D) == 9);
    CHECK(uni::combining_class(0x301) == 230);
}
