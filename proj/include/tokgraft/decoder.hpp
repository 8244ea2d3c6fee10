#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "tokgraft/vocabulary.hpp"

namespace tokgraft {

struct TokenHead {
    std::size_t vocab_size = 0;
    std::size_t hidden_dim = 0;
    std::vector<float> weights;  // row-major vocab_size x hidden_dim
    std::vector<float> bias;     // vocab_size, zero by default
};

TokenHead random_head(std::size_t vocab_size, std::size_t hidden_dim, std::uint64_t seed);

// Appends k rows drawn from a zero-mean Gaussian whose std is the mean
// per-row std of the existing rows; rows [0, vocab_size) are copied bit for
// bit. Deterministic for a given seed on every platform (Box-Muller over
// mt19937_64, not std::normal_distribution).
TokenHead expand_head(const TokenHead& head, std::size_t k, std::uint64_t seed);

void save_head(const std::filesystem::path& path, const TokenHead& head);
TokenHead load_head(const std::filesystem::path& path);

// softmax(weights . hidden + bias); argmax id with ties going to the lowest id.
std::pair<TokenId, std::vector<float>> predict_next(const TokenHead& head,
                                                    std::span<const float> hidden);

struct ToyDecoderConfig {
    std::size_t hidden_dim = 256;
    std::size_t num_layers = 4;
    std::uint64_t rng_seed = 0;
};

struct StepTimings {
    double prefill_ms = 0.0;
    std::vector<double> step_ms;

    double total_ms() const {
        double t = 0.0;
        for (double s : step_ms) {
            t += s;
        }
        return t;
    }
};

struct DecodeResult {
    std::vector<TokenId> tokens;  // generated tokens only, prompt excluded
    StepTimings timings;
};

// Small transformer decoder with tied embeddings (head rows double as input
// embeddings), RMS norm, single-head attention over a cached key/value
// history, and a tanh MLP. Exists to make token-count costs measurable, not
// to model speech.
class ToyDecoder {
public:
    ToyDecoder(ToyDecoderConfig config, TokenHead head);

    DecodeResult greedy_decode(std::span<const TokenId> prompt, std::size_t max_new,
                               TokenId stop_id);

    const TokenHead& head() const { return head_; }
    const ToyDecoderConfig& config() const { return config_; }

private:
    struct Layer {
        std::vector<float> wq, wk, wv, wo, w1, w2;  // each hidden x hidden
    };

    void forward(TokenId token, std::vector<std::vector<float>>& key_cache,
                 std::vector<std::vector<float>>& value_cache, std::vector<float>& out);

    ToyDecoderConfig config_;
    TokenHead head_;
    std::vector<Layer> layers_;
};

struct BenchSample {
    std::int64_t n = 0;
    std::vector<double> runs_ms;
    double median_ms = 0.0;
};

struct DecodeCostFit {
    double a = 0.0;  // ms per token
    double b = 0.0;  // ms per token^2
    double r_squared = 0.0;
};

// Constrained least squares of T(N) = a*N + b*N^2 over per-N medians; needs
// at least 5 distinct N values with at least 3 runs each.
DecodeCostFit fit_cost(const std::vector<BenchSample>& samples);

double fitted_time(const DecodeCostFit& fit, std::int64_t n);
double predicted_speedup(const DecodeCostFit& fit, std::int64_t n_base, std::int64_t n_ext);

struct BenchConfig {
    std::size_t vocab_size = 2048;
    std::size_t hidden_dim = 256;
    std::size_t num_layers = 4;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> n_values = {32, 64, 128, 256, 512};
    int runs = 3;
    int warmup = 1;
};

struct BenchRun {
    std::vector<BenchSample> samples;
    DecodeCostFit fit;
};

double measure_decode_ms(ToyDecoder& decoder, std::span<const TokenId> prompt, std::int64_t n);
BenchRun run_benchmark(const BenchConfig& config, const std::vector<TokenId>& prompt);

}  // namespace tokgraft
