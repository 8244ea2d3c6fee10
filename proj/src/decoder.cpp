#include "tokgraft/decoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "tokgraft/errors.hpp"
#include "tokgraft/kernels.hpp"

namespace tokgraft {

namespace {

// Box-Muller over mt19937_64 so sequences match across standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;          // [0,1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

double row_std(const float* row, std::size_t n) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += row[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = row[i] - mean;
        var += d * d;
    }
    return std::sqrt(var / static_cast<double>(n));
}

void rms_norm(const std::vector<float>& in, std::vector<float>& out) {
    double sum_sq = 0.0;
    for (float x : in) {
        sum_sq += static_cast<double>(x) * x;
    }
    const float inv = static_cast<float>(
        1.0 / std::sqrt(sum_sq / static_cast<double>(in.size()) + 1e-5));
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = in[i] * inv;
    }
}

std::vector<float> random_matrix(std::size_t rows, std::size_t cols, GaussianRng& rng,
                                 double scale) {
    std::vector<float> m(rows * cols);
    for (float& x : m) {
        x = static_cast<float>(rng.next() * scale);
    }
    return m;
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

TokenHead random_head(std::size_t vocab_size, std::size_t hidden_dim, std::uint64_t seed) {
    GaussianRng rng(seed);
    TokenHead head;
    head.vocab_size = vocab_size;
    head.hidden_dim = hidden_dim;
    head.weights = random_matrix(vocab_size, hidden_dim, rng, 0.02);
    head.bias.assign(vocab_size, 0.0f);
    return head;
}

TokenHead expand_head(const TokenHead& head, std::size_t k, std::uint64_t seed) {
    if (head.weights.size() != head.vocab_size * head.hidden_dim ||
        head.bias.size() != head.vocab_size) {
        raise(Errc::invalid_argument, "token head has inconsistent dimensions");
    }
    TokenHead out;
    out.vocab_size = head.vocab_size + k;
    out.hidden_dim = head.hidden_dim;
    out.weights.resize(out.vocab_size * out.hidden_dim);
    out.bias.assign(out.vocab_size, 0.0f);
    if (!head.weights.empty()) {
        std::memcpy(out.weights.data(), head.weights.data(),
                    head.weights.size() * sizeof(float));
    }
    if (!head.bias.empty()) {
        std::memcpy(out.bias.data(), head.bias.data(), head.bias.size() * sizeof(float));
    }

    double std_sum = 0.0;
    for (std::size_t r = 0; r < head.vocab_size; ++r) {
        std_sum += row_std(head.weights.data() + r * head.hidden_dim, head.hidden_dim);
    }
    const double scale =
        head.vocab_size > 0 ? std_sum / static_cast<double>(head.vocab_size) : 0.02;

    GaussianRng rng(seed);
    float* new_rows = out.weights.data() + head.vocab_size * head.hidden_dim;
    for (std::size_t i = 0; i < k * head.hidden_dim; ++i) {
        new_rows[i] = static_cast<float>(rng.next() * scale);
    }
    return out;
}

namespace {

constexpr char kHeadMagic[8] = {'T', 'O', 'K', 'G', 'H', 'E', 'A', 'D'};

}  // namespace

void save_head(const std::filesystem::path& path, const TokenHead& head) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io_error, "cannot open " + path.string() + " for writing");
    }
    const std::uint32_t version = 1;
    const std::uint64_t vocab = head.vocab_size;
    const std::uint64_t hidden = head.hidden_dim;
    out.write(kHeadMagic, sizeof(kHeadMagic));
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&vocab), sizeof(vocab));
    out.write(reinterpret_cast<const char*>(&hidden), sizeof(hidden));
    out.write(reinterpret_cast<const char*>(head.weights.data()),
              static_cast<std::streamsize>(head.weights.size() * sizeof(float)));
    out.write(reinterpret_cast<const char*>(head.bias.data()),
              static_cast<std::streamsize>(head.bias.size() * sizeof(float)));
    if (!out) {
        raise(Errc::io_error, "write failed for " + path.string());
    }
}

TokenHead load_head(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::io_error, "cannot open " + path.string());
    }
    char magic[8];
    std::uint32_t version = 0;
    std::uint64_t vocab = 0;
    std::uint64_t hidden = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&vocab), sizeof(vocab));
    in.read(reinterpret_cast<char*>(&hidden), sizeof(hidden));
    if (!in || std::memcmp(magic, kHeadMagic, sizeof(magic)) != 0 || version != 1) {
        raise(Errc::invalid_format, path.string() + " is not a token head file");
    }
    TokenHead head;
    head.vocab_size = vocab;
    head.hidden_dim = hidden;
    head.weights.resize(vocab * hidden);
    head.bias.resize(vocab);
    in.read(reinterpret_cast<char*>(head.weights.data()),
            static_cast<std::streamsize>(head.weights.size() * sizeof(float)));
    in.read(reinterpret_cast<char*>(head.bias.data()),
            static_cast<std::streamsize>(head.bias.size() * sizeof(float)));
    if (!in) {
        raise(Errc::invalid_format, path.string() + " is truncated");
    }
    return head;
}

std::pair<TokenId, std::vector<float>> predict_next(const TokenHead& head,
                                                    std::span<const float> hidden) {
    if (hidden.size() != head.hidden_dim) {
        raise(Errc::invalid_argument, "hidden state length does not match head");
    }
    for (float x : hidden) {
        if (!std::isfinite(x)) {
            raise(Errc::non_finite_input, "hidden state contains a non-finite value");
        }
    }
    std::vector<float> logits(head.vocab_size);
    kern::ops().matvec(head.weights.data(), hidden.data(), logits.data(), head.vocab_size,
                       head.hidden_dim);
    for (std::size_t i = 0; i < head.vocab_size; ++i) {
        logits[i] += head.bias[i];
        if (!std::isfinite(logits[i])) {
            raise(Errc::non_finite_input, "head produced a non-finite logit");
        }
    }
    std::vector<float> probs(head.vocab_size);
    kern::softmax(logits.data(), probs.data(), head.vocab_size);
    TokenId best = 0;
    for (std::size_t i = 1; i < head.vocab_size; ++i) {
        if (logits[i] > logits[best]) {
            best = static_cast<TokenId>(i);
        }
    }
    return {best, std::move(probs)};
}

ToyDecoder::ToyDecoder(ToyDecoderConfig config, TokenHead head)
    : config_(config), head_(std::move(head)) {
    if (config_.hidden_dim < 1 || config_.num_layers < 1) {
        raise(Errc::invalid_argument, "decoder needs hidden_dim >= 1 and num_layers >= 1");
    }
    if (head_.hidden_dim != config_.hidden_dim) {
        raise(Errc::invalid_argument, "head hidden_dim does not match decoder config");
    }
    GaussianRng rng(config_.rng_seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
    layers_.resize(config_.num_layers);
    for (Layer& layer : layers_) {
        layer.wq = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
        layer.wk = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
        layer.wv = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
        layer.wo = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
        layer.w1 = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
        layer.w2 = random_matrix(config_.hidden_dim, config_.hidden_dim, rng, scale);
    }
}

void ToyDecoder::forward(TokenId token, std::vector<std::vector<float>>& key_cache,
                         std::vector<std::vector<float>>& value_cache,
                         std::vector<float>& out) {
    const std::size_t d = config_.hidden_dim;
    if (token < 0 || static_cast<std::size_t>(token) >= head_.vocab_size) {
        raise(Errc::unknown_token_id, "token id " + std::to_string(token) +
                                          " outside the head's vocabulary");
    }
    const kern::Ops& k = kern::ops();

    std::vector<float> x(head_.weights.begin() + static_cast<std::ptrdiff_t>(token) *
                                                     static_cast<std::ptrdiff_t>(d),
                         head_.weights.begin() + (static_cast<std::ptrdiff_t>(token) + 1) *
                                                     static_cast<std::ptrdiff_t>(d));
    std::vector<float> h(d), q(d), kv(d), ctx(d), tmp(d);
    const float inv_sqrt_d = 1.0f / std::sqrt(static_cast<float>(d));

    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const Layer& layer = layers_[li];
        std::vector<float>& keys = key_cache[li];
        std::vector<float>& values = value_cache[li];

        rms_norm(x, h);
        k.matvec(layer.wq.data(), h.data(), q.data(), d, d);
        const std::size_t pos = keys.size() / d;
        keys.resize(keys.size() + d);
        values.resize(values.size() + d);
        k.matvec(layer.wk.data(), h.data(), keys.data() + pos * d, d, d);
        k.matvec(layer.wv.data(), h.data(), values.data() + pos * d, d, d);

        const std::size_t history = pos + 1;
        std::vector<float> scores(history);
        for (std::size_t t = 0; t < history; ++t) {
            scores[t] = k.dot(q.data(), keys.data() + t * d, d) * inv_sqrt_d;
        }
        std::vector<float> attn(history);
        kern::softmax(scores.data(), attn.data(), history);
        std::fill(ctx.begin(), ctx.end(), 0.0f);
        for (std::size_t t = 0; t < history; ++t) {
            k.axpy(attn[t], values.data() + t * d, ctx.data(), d);
        }
        k.matvec(layer.wo.data(), ctx.data(), tmp.data(), d, d);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] += tmp[i];
        }

        rms_norm(x, h);
        k.matvec(layer.w1.data(), h.data(), tmp.data(), d, d);
        for (std::size_t i = 0; i < d; ++i) {
            tmp[i] = std::tanh(tmp[i]);
        }
        k.matvec(layer.w2.data(), tmp.data(), kv.data(), d, d);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] += kv[i];
        }
    }
    rms_norm(x, out);
}

DecodeResult ToyDecoder::greedy_decode(std::span<const TokenId> prompt, std::size_t max_new,
                                       TokenId stop_id) {
    if (prompt.empty()) {
        raise(Errc::invalid_argument, "greedy_decode needs a nonempty prompt");
    }
    using clock = std::chrono::steady_clock;
    const std::size_t d = config_.hidden_dim;
    const std::size_t capacity = prompt.size() + max_new;

    std::vector<std::vector<float>> key_cache(layers_.size());
    std::vector<std::vector<float>> value_cache(layers_.size());
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        key_cache[li].reserve(capacity * d);
        value_cache[li].reserve(capacity * d);
    }

    DecodeResult result;
    std::vector<float> hidden(d);

    // Prefill runs the prompt except its last token; that token starts the
    // first timed generation step so T(N) covers exactly N predictions.
    const auto prefill_start = clock::now();
    for (std::size_t i = 0; i + 1 < prompt.size(); ++i) {
        forward(prompt[i], key_cache, value_cache, hidden);
    }
    result.timings.prefill_ms =
        std::chrono::duration<double, std::milli>(clock::now() - prefill_start).count();

    TokenId current = prompt.back();
    for (std::size_t step = 0; step < max_new; ++step) {
        const auto step_start = clock::now();
        forward(current, key_cache, value_cache, hidden);
        auto [next, probs] = predict_next(head_, hidden);
        result.timings.step_ms.push_back(
            std::chrono::duration<double, std::milli>(clock::now() - step_start).count());
        result.tokens.push_back(next);
        current = next;
        if (next == stop_id) {
            break;
        }
    }
    return result;
}

DecodeCostFit fit_cost(const std::vector<BenchSample>& samples) {
    std::vector<std::pair<double, double>> points;  // (n, median_ms)
    std::vector<std::int64_t> distinct;
    for (const BenchSample& s : samples) {
        if (s.runs_ms.size() < 3) {
            raise(Errc::insufficient_samples,
                  "need >= 3 runs per N, got " + std::to_string(s.runs_ms.size()) +
                      " for N=" + std::to_string(s.n));
        }
        if (std::find(distinct.begin(), distinct.end(), s.n) == distinct.end()) {
            distinct.push_back(s.n);
        }
        points.emplace_back(static_cast<double>(s.n), median_of(s.runs_ms));
    }
    if (distinct.size() < 5) {
        raise(Errc::insufficient_samples, "need >= 5 distinct N values, got " +
                                              std::to_string(distinct.size()));
    }

    double s1 = 0, s2 = 0, s3 = 0, r1 = 0, r2 = 0;
    for (const auto& [n, t] : points) {
        const double n2 = n * n;
        s1 += n2;
        s2 += n2 * n;
        s3 += n2 * n2;
        r1 += t * n;
        r2 += t * n2;
    }

    DecodeCostFit fit;
    const double det = s1 * s3 - s2 * s2;
    if (det > 0) {
        fit.a = (r1 * s3 - r2 * s2) / det;
        fit.b = (s1 * r2 - s2 * r1) / det;
    }
    auto sse_of = [&](double a, double b) {
        double sse = 0.0;
        for (const auto& [n, t] : points) {
            const double e = t - (a * n + b * n * n);
            sse += e * e;
        }
        return sse;
    };
    if (fit.a < 0 || fit.b < 0 || det <= 0) {
        const double only_b = s3 > 0 ? std::max(0.0, r2 / s3) : 0.0;
        const double only_a = s1 > 0 ? std::max(0.0, r1 / s1) : 0.0;
        if (sse_of(0.0, only_b) < sse_of(only_a, 0.0)) {
            fit.a = 0.0;
            fit.b = only_b;
        } else {
            fit.a = only_a;
            fit.b = 0.0;
        }
    }

    double mean_t = 0.0;
    for (const auto& [n, t] : points) {
        mean_t += t;
    }
    mean_t /= static_cast<double>(points.size());
    double sst = 0.0;
    for (const auto& [n, t] : points) {
        sst += (t - mean_t) * (t - mean_t);
    }
    const double sse = sse_of(fit.a, fit.b);
    if (sst > 0) {
        fit.r_squared = std::clamp(1.0 - sse / sst, 0.0, 1.0);
    } else {
        fit.r_squared = sse < 1e-12 ? 1.0 : 0.0;
    }
    return fit;
}

double fitted_time(const DecodeCostFit& fit, std::int64_t n) {
    const double x = static_cast<double>(n);
    return fit.a * x + fit.b * x * x;
}

double predicted_speedup(const DecodeCostFit& fit, std::int64_t n_base, std::int64_t n_ext) {
    if (n_ext < 1 || n_base < n_ext) {
        raise(Errc::invalid_token_counts, "need n_base >= n_ext >= 1, got n_base=" +
                                              std::to_string(n_base) +
                                              " n_ext=" + std::to_string(n_ext));
    }
    const double denom = fitted_time(fit, n_ext);
    if (denom <= 0.0) {
        return 1.0;
    }
    return fitted_time(fit, n_base) / denom;
}

double measure_decode_ms(ToyDecoder& decoder, std::span<const TokenId> prompt,
                         std::int64_t n) {
    const DecodeResult result =
        decoder.greedy_decode(prompt, static_cast<std::size_t>(n), TokenId{-1});
    return result.timings.total_ms();
}

BenchRun run_benchmark(const BenchConfig& config, const std::vector<TokenId>& prompt) {
    TokenHead head = random_head(config.vocab_size, config.hidden_dim, config.seed);
    ToyDecoderConfig dc;
    dc.hidden_dim = config.hidden_dim;
    dc.num_layers = config.num_layers;
    dc.rng_seed = config.seed + 1;
    ToyDecoder decoder(dc, std::move(head));

    BenchRun run;
    for (std::int64_t n : config.n_values) {
        for (int w = 0; w < config.warmup; ++w) {
            measure_decode_ms(decoder, prompt, n);
        }
        BenchSample sample;
        sample.n = n;
        for (int r = 0; r < config.runs; ++r) {
            sample.runs_ms.push_back(measure_decode_ms(decoder, prompt, n));
        }
        sample.median_ms = median_of(sample.runs_ms);
        run.samples.push_back(std::move(sample));
    }
    run.fit = fit_cost(run.samples);
    return run;
}

}  // namespace tokgraft
