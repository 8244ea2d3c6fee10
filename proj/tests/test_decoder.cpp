#include <cmath>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "tokgraft/decoder.hpp"
#include "tokgraft/errors.hpp"

using namespace tokgraft;
namespace fs = std::filesystem;

namespace {

std::vector<float> unit_hidden(std::size_t d, float fill = 0.25f) {
    return std::vector<float>(d, fill);
}

}  // namespace

TEST_CASE("random head is seeded and deterministic") {
    TokenHead a = random_head(64, 16, 7);
    TokenHead b = random_head(64, 16, 7);
    TokenHead c = random_head(64, 16, 8);
    CHECK(a.weights == b.weights);
    CHECK(a.weights != c.weights);
    CHECK(a.weights.size() == 64 * 16);
    CHECK(a.bias == std::vector<float>(64, 0.0f));
    double mean = std::accumulate(a.weights.begin(), a.weights.end(), 0.0) / a.weights.size();
    CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("expand with k zero is an exact copy") {
    TokenHead head = random_head(32, 8, 3);
    TokenHead out = expand_head(head, 0, 99);
    CHECK(out.vocab_size == 32);
    CHECK(out.weights == head.weights);
    CHECK(out.bias == head.bias);
}

TEST_CASE("expand preserves old rows bit for bit") {
    TokenHead head = random_head(200, 24, 5);
    for (std::size_t k : {1ul, 250ul, 2002ul}) {
        TokenHead out = expand_head(head, k, 42);
        REQUIRE(out.vocab_size == 200 + k);
        REQUIRE(out.hidden_dim == 24);
        CHECK(std::memcmp(out.weights.data(), head.weights.data(),
                          head.weights.size() * sizeof(float)) == 0);
        CHECK(std::memcmp(out.bias.data(), head.bias.data(),
                          head.bias.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("expanded logits match on the old vocabulary") {
    TokenHead head = random_head(128, 32, 11);
    TokenHead big = expand_head(head, 77, 123);
    auto h = unit_hidden(32);
    auto [_, probs_small] = predict_next(head, h);
    auto [__, probs_big] = predict_next(big, h);

    // Raw logits (weights.h + bias) agree exactly on shared rows.
    for (std::size_t r = 0; r < 128; ++r) {
        float a = head.bias[r];
        float b = big.bias[r];
        for (std::size_t c = 0; c < 32; ++c) {
            a += head.weights[r * 32 + c] * h[c];
            b += big.weights[r * 32 + c] * h[c];
        }
        CHECK(a == b);
    }
    CHECK(probs_small.size() == 128);
    CHECK(probs_big.size() == 205);
}

TEST_CASE("new rows are seeded gaussian with the head's own scale") {
    TokenHead head = random_head(100, 16, 2);
    TokenHead a = expand_head(head, 50, 1);
    TokenHead b = expand_head(head, 50, 1);
    TokenHead c = expand_head(head, 50, 2);
    CHECK(a.weights == b.weights);
    // Same head, different seed: old rows equal, new rows differ.
    CHECK(std::memcmp(a.weights.data(), c.weights.data(),
                      head.weights.size() * sizeof(float)) == 0);
    CHECK(a.weights != c.weights);

    // New-row spread tracks the existing rows' spread.
    const float* fresh = a.weights.data() + head.weights.size();
    double sq = 0.0;
    for (std::size_t i = 0; i < 50 * 16; ++i) {
        sq += static_cast<double>(fresh[i]) * fresh[i];
    }
    double std_new = std::sqrt(sq / (50 * 16));
    CHECK(std_new == doctest::Approx(0.02).epsilon(0.25));

    // New biases are zero.
    for (std::size_t r = 100; r < a.vocab_size; ++r) {
        CHECK(a.bias[r] == 0.0f);
    }
}

TEST_CASE("zero head expands with zero rows, empty head falls back") {
    TokenHead zero;
    zero.vocab_size = 4;
    zero.hidden_dim = 8;
    zero.weights.assign(32, 0.0f);
    zero.bias.assign(4, 0.0f);
    TokenHead out = expand_head(zero, 3, 9);
    for (float w : out.weights) {
        CHECK(w == 0.0f);
    }

    TokenHead empty;
    empty.hidden_dim = 8;
    TokenHead grown = expand_head(empty, 3, 9);
    bool any_nonzero = false;
    for (float w : grown.weights) {
        if (w != 0.0f) {
            any_nonzero = true;
        }
    }
    CHECK(any_nonzero);
}

TEST_CASE("expand rejects inconsistent heads") {
    TokenHead bad;
    bad.vocab_size = 4;
    bad.hidden_dim = 8;
    bad.weights.assign(31, 0.0f);  // one short
    bad.bias.assign(4, 0.0f);
    CHECK_THROWS_AS(expand_head(bad, 1, 0), Error);
}

TEST_CASE("head save load roundtrip") {
    TokenHead head = random_head(96, 24, 77);
    head.bias[5] = 1.5f;
    fs::path p = fs::temp_directory_path() / "tokgraft_head.bin";
    save_head(p, head);
    TokenHead back = load_head(p);
    CHECK(back.vocab_size == head.vocab_size);
    CHECK(back.hidden_dim == head.hidden_dim);
    CHECK(back.weights == head.weights);
    CHECK(back.bias == head.bias);

    CHECK_THROWS_AS(load_head(fs::temp_directory_path() / "tokgraft_missing.bin"), Error);
}

TEST_CASE("predict next softmax sums to one and argmax is sane") {
    TokenHead head = random_head(512, 64, 13);
    auto h = unit_hidden(64, 0.1f);
    auto [best, probs] = predict_next(head, h);
    REQUIRE(probs.size() == 512);
    double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    for (std::size_t i = 0; i < probs.size(); ++i) {
        CHECK(probs[i] <= probs[best] + 1e-9f);
    }
}

TEST_CASE("argmax ties go to the lowest id") {
    TokenHead head;
    head.vocab_size = 3;
    head.hidden_dim = 2;
    head.weights = {1.0f, 0.0f, 1.0f, 0.0f, 0.5f, 0.0f};  // rows 0 and 1 identical
    head.bias.assign(3, 0.0f);
    auto h = unit_hidden(2, 1.0f);
    auto [best, probs] = predict_next(head, h);
    CHECK(best == 0);
    CHECK(probs[0] == probs[1]);
}

TEST_CASE("argmax is invariant to hidden scaling") {
    TokenHead head = random_head(64, 16, 21);
    auto h1 = unit_hidden(16, 0.3f);
    auto h2 = unit_hidden(16, 0.9f);
    CHECK(predict_next(head, h1).first == predict_next(head, h2).first);
}

TEST_CASE("predict next validates input") {
    TokenHead head = random_head(8, 4, 1);
    std::vector<float> wrong(3, 0.0f);
    CHECK_THROWS_AS(predict_next(head, wrong), Error);
    std::vector<float> nan(4, 0.0f);
    nan[2] = std::nanf("");
    try {
        predict_next(head, nan);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_finite_input);
    }
}

TEST_CASE("greedy decode is deterministic and respects max_new") {
    TokenHead head = random_head(256, 32, 4);
    ToyDecoder d1({.hidden_dim = 32, .num_layers = 2, .rng_seed = 9}, head);
    ToyDecoder d2({.hidden_dim = 32, .num_layers = 2, .rng_seed = 9}, head);
    std::vector<TokenId> prompt = {1, 2, 3};
    DecodeResult r1 = d1.greedy_decode(prompt, 20, -1);
    DecodeResult r2 = d2.greedy_decode(prompt, 20, -1);
    CHECK(r1.tokens == r2.tokens);
    CHECK(r1.tokens.size() == 20);
    CHECK(r1.timings.step_ms.size() == 20);
    for (TokenId t : r1.tokens) {
        CHECK(t >= 0);
        CHECK(t < 256);
    }

    DecodeResult none = d1.greedy_decode(prompt, 0, -1);
    CHECK(none.tokens.empty());
    CHECK(none.timings.step_ms.empty());
}

TEST_CASE("greedy decode stops after emitting the stop token") {
    TokenHead head = random_head(64, 16, 30);
    ToyDecoder probe({.hidden_dim = 16, .num_layers = 1, .rng_seed = 2}, head);
    std::vector<TokenId> prompt = {5};
    DecodeResult free_run = probe.greedy_decode(prompt, 8, -1);
    REQUIRE(free_run.tokens.size() == 8);
    TokenId target = free_run.tokens[2];
    std::size_t first = 0;
    while (free_run.tokens[first] != target) {
        ++first;
    }

    ToyDecoder again({.hidden_dim = 16, .num_layers = 1, .rng_seed = 2}, head);
    DecodeResult stopped = again.greedy_decode(prompt, 8, target);
    // Same trajectory up to and including the stop token, then halt.
    REQUIRE(stopped.tokens.size() == first + 1);
    CHECK(stopped.tokens.back() == target);
    for (std::size_t i = 0; i < stopped.tokens.size(); ++i) {
        CHECK(stopped.tokens[i] == free_run.tokens[i]);
    }
}

TEST_CASE("greedy decode rejects bad inputs") {
    TokenHead head = random_head(16, 8, 1);
    ToyDecoder d({.hidden_dim = 8, .num_layers = 1, .rng_seed = 0}, head);
    CHECK_THROWS_AS(d.greedy_decode({}, 4, -1), Error);
    std::vector<TokenId> bad = {99};
    CHECK_THROWS_AS(d.greedy_decode(bad, 4, -1), Error);

    TokenHead mismatched = random_head(16, 4, 1);
    CHECK_THROWS_AS(
        ToyDecoder({.hidden_dim = 8, .num_layers = 1, .rng_seed = 0}, mismatched), Error);
}

TEST_CASE("later steps cost more as the attention window grows") {
    TokenHead head = random_head(512, 64, 17);
    ToyDecoder d({.hidden_dim = 64, .num_layers = 2, .rng_seed = 3}, head);
    std::vector<TokenId> prompt = {1};
    DecodeResult r = d.greedy_decode(prompt, 384, -1);
    REQUIRE(r.timings.step_ms.size() == 384);
    auto mean_of = [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s += r.timings.step_ms[i];
        }
        return s / (hi - lo);
    };
    CHECK(mean_of(320, 384) > mean_of(0, 64));
    CHECK(r.timings.total_ms() == doctest::Approx(mean_of(0, 384) * 384).epsilon(1e-9));
}

TEST_CASE("fit recovers exact linear cost") {
    std::vector<BenchSample> samples;
    for (std::int64_t n : {32, 64, 128, 256, 512}) {
        BenchSample s;
        s.n = n;
        s.median_ms = 0.5 * n;
        s.runs_ms = {s.median_ms, s.median_ms, s.median_ms};
        samples.push_back(s);
    }
    DecodeCostFit fit = fit_cost(samples);
    CHECK(fit.a == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fit.b == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fitted_time(fit, 100) == doctest::Approx(50.0));
}

TEST_CASE("fit recovers exact quadratic and mixed costs") {
    std::vector<BenchSample> samples;
    for (std::int64_t n : {32, 64, 128, 256, 512}) {
        BenchSample s;
        s.n = n;
        s.median_ms = 0.01 * n + 0.002 * n * n;
        s.runs_ms = {s.median_ms, s.median_ms, s.median_ms};
        samples.push_back(s);
    }
    DecodeCostFit fit = fit_cost(samples);
    CHECK(fit.a == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(fit.b == doctest::Approx(0.002).epsilon(1e-6));
    CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit clamps negative coefficients to the axis") {
    // Perfectly flat data wants a = b = 0; the constrained fit picks the
    // non-negative best rather than going negative.
    std::vector<BenchSample> samples;
    for (std::int64_t n : {32, 64, 128, 256, 512}) {
        BenchSample s;
        s.n = n;
        s.median_ms = 1000.0 - 0.5 * n;  // decreasing, impossible physically
        s.runs_ms = {s.median_ms, s.median_ms, s.median_ms};
        samples.push_back(s);
    }
    DecodeCostFit fit = fit_cost(samples);
    CHECK(fit.a >= 0.0);
    CHECK(fit.b >= 0.0);
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
}

TEST_CASE("fit requires five distinct n and three runs each") {
    std::vector<BenchSample> few;
    for (std::int64_t n : {32, 64, 128, 256}) {
        BenchSample s;
        s.n = n;
        s.median_ms = n;
        s.runs_ms = {1.0, 1.0, 1.0};
        few.push_back(s);
    }
    CHECK_THROWS_AS(fit_cost(few), Error);

    std::vector<BenchSample> thin;
    for (std::int64_t n : {32, 64, 128, 256, 512}) {
        BenchSample s;
        s.n = n;
        s.median_ms = n;
        s.runs_ms = {1.0, 1.0};  // only two runs
        thin.push_back(s);
    }
    try {
        fit_cost(thin);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::insufficient_samples);
    }
}

TEST_CASE("predicted speedup follows the fitted regime") {
    DecodeCostFit linear{.a = 1.0, .b = 0.0, .r_squared = 1.0};
    CHECK(predicted_speedup(linear, 79, 31) == doctest::Approx(79.0 / 31.0));
    CHECK(predicted_speedup(linear, 27, 19) == doctest::Approx(27.0 / 19.0));
    CHECK(predicted_speedup(linear, 50, 50) == doctest::Approx(1.0));

    DecodeCostFit quad{.a = 0.0, .b = 1.0, .r_squared = 1.0};
    CHECK(predicted_speedup(quad, 79, 31) == doctest::Approx((79.0 * 79.0) / (31.0 * 31.0)));
    CHECK(predicted_speedup(quad, 27, 19) == doctest::Approx((27.0 * 27.0) / (19.0 * 19.0)));

    CHECK_THROWS_AS(predicted_speedup(linear, 31, 79), Error);  // ext worse than base
    CHECK_THROWS_AS(predicted_speedup(linear, 79, 0), Error);
}

TEST_CASE("measure and benchmark produce usable samples") {
    BenchConfig cfg;
    cfg.vocab_size = 128;
    cfg.hidden_dim = 16;
    cfg.num_layers = 1;
    cfg.seed = 5;
    cfg.n_values = {4, 8, 12, 16, 20};
    cfg.runs = 3;
    cfg.warmup = 1;
    BenchRun run = run_benchmark(cfg, {1, 2});
    REQUIRE(run.samples.size() == 5);
    for (const auto& s : run.samples) {
        CHECK(s.runs_ms.size() == 3);
        CHECK(s.median_ms > 0.0);
        for (double ms : s.runs_ms) {
            CHECK(ms > 0.0);
        }
    }
    CHECK(run.fit.a >= 0.0);
    CHECK(run.fit.b >= 0.0);
}
