#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clickdet/embed.hpp"
#include "clickdet/error.hpp"
#include "clickdet/num.hpp"
#include "clickdet/rng.hpp"
#include "clickdet/serialize.hpp"

namespace clickdet::head {

// Classifier head: masked mean pooling -> dense(hidden, ReLU) -> sigmoid.
// The same shape doubles as the gradient container.
struct HeadParams {
    Eigen::MatrixXd W1;  // hidden x H
    Eigen::VectorXd b1;  // hidden
    Eigen::VectorXd w2;  // hidden
    double b2 = 0.0;

    int input_width() const { return static_cast<int>(W1.cols()); }
    int hidden_width() const { return static_cast<int>(W1.rows()); }

    static HeadParams zeros(int input_width, int hidden_width) {
        HeadParams p;
        p.W1 = Eigen::MatrixXd::Zero(hidden_width, input_width);
        p.b1 = Eigen::VectorXd::Zero(hidden_width);
        p.w2 = Eigen::VectorXd::Zero(hidden_width);
        p.b2 = 0.0;
        return p;
    }

    bool all_finite() const {
        return W1.allFinite() && b1.allFinite() && w2.allFinite() && std::isfinite(b2);
    }
};

constexpr int kDefaultHiddenWidth = 100;
constexpr double kProbEps = 1e-7;

struct AdamHyper {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    HeadParams m;
    HeadParams v;
    std::int64_t t = 0;
    AdamHyper hyper;

    static AdamState fresh(int input_width, int hidden_width, AdamHyper hyper = {}) {
        AdamState s;
        s.m = HeadParams::zeros(input_width, hidden_width);
        s.v = HeadParams::zeros(input_width, hidden_width);
        s.t = 0;
        s.hyper = hyper;
        return s;
    }
};

struct TrainConfig {
    int epochs = 3;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double learning_rate = 1e-5;
    double threshold = 0.5;
    int hidden_width = kDefaultHiddenWidth;
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    HeadParams params;
    std::vector<EpochLog> log;
};

// Arithmetic mean of the embedding rows at mask-1 positions. Padded rows
// never contribute.
inline Eigen::VectorXd masked_mean_pool(const embed::EmbeddingSequence& emb) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(emb.cols);
    std::int64_t n = 0;
    for (int i = 0; i < emb.rows; ++i) {
        if (!emb.mask[static_cast<std::size_t>(i)]) continue;
        const float* r = emb.row(i);
        for (int j = 0; j < emb.cols; ++j) sum[j] += static_cast<double>(r[j]);
        ++n;
    }
    if (n == 0) throw_data("masked_mean_pool: attention mask is all zero");
    return sum / static_cast<double>(n);
}

using num::stable_sigmoid;

inline double forward(const HeadParams& params, const Eigen::VectorXd& x) {
    if (x.size() != params.W1.cols()) {
        throw_data("forward: input width " + std::to_string(x.size()) + " does not match params width " +
                   std::to_string(params.W1.cols()));
    }
    if (!x.allFinite()) throw_data("forward: non-finite input vector");
    const Eigen::VectorXd hidden = (params.W1 * x + params.b1).cwiseMax(0.0);
    return stable_sigmoid(params.w2.dot(hidden) + params.b2);
}

// Binary cross-entropy with the probability clamped to [eps, 1-eps].
inline double bce_loss(double p, int y) {
    const double q = std::min(std::max(p, kProbEps), 1.0 - kProbEps);
    return y ? -std::log(q) : -std::log(1.0 - q);
}

// Exact mean-over-batch gradient of bce_loss(forward(x), y). The ReLU
// subgradient at 0 is taken as 0.
inline HeadParams gradients(const HeadParams& params,
                            const std::vector<std::pair<Eigen::VectorXd, int>>& batch) {
    if (batch.empty()) throw_data("gradients: empty batch");
    HeadParams g = HeadParams::zeros(params.input_width(), params.hidden_width());
    for (const auto& [x, y] : batch) {
        const Eigen::VectorXd z1 = params.W1 * x + params.b1;
        const Eigen::VectorXd a = z1.cwiseMax(0.0);
        const double p = stable_sigmoid(params.w2.dot(a) + params.b2);
        const double dz2 = p - static_cast<double>(y);
        g.w2 += dz2 * a;
        g.b2 += dz2;
        Eigen::VectorXd dz1 = dz2 * params.w2;
        for (Eigen::Index i = 0; i < dz1.size(); ++i) {
            if (z1[i] <= 0.0) dz1[i] = 0.0;
        }
        g.W1 += dz1 * x.transpose();
        g.b1 += dz1;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    g.W1 *= inv;
    g.b1 *= inv;
    g.w2 *= inv;
    g.b2 *= inv;
    return g;
}

// Standard bias-corrected Adam update, in place.
inline void adam_step(HeadParams& params, const HeadParams& grads, AdamState& state) {
    const auto& h = state.hyper;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));

    auto update = [&](Eigen::MatrixXd& theta, Eigen::MatrixXd& m, Eigen::MatrixXd& v,
                      const Eigen::MatrixXd& g) {
        m = h.beta1 * m + (1.0 - h.beta1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
        theta.array() -=
            h.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + h.epsilon);
    };
    auto update_vec = [&](Eigen::VectorXd& theta, Eigen::VectorXd& m, Eigen::VectorXd& v,
                          const Eigen::VectorXd& g) {
        m = h.beta1 * m + (1.0 - h.beta1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
        theta.array() -=
            h.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + h.epsilon);
    };

    update(params.W1, state.m.W1, state.v.W1, grads.W1);
    update_vec(params.b1, state.m.b1, state.v.b1, grads.b1);
    update_vec(params.w2, state.m.w2, state.v.w2, grads.w2);
    {
        auto& m = state.m.b2;
        auto& v = state.v.b2;
        m = h.beta1 * m + (1.0 - h.beta1) * grads.b2;
        v = h.beta2 * v + (1.0 - h.beta2) * grads.b2 * grads.b2;
        params.b2 -= h.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + h.epsilon);
    }
}

// W1 drawn uniform in [-1/sqrt(H), 1/sqrt(H)] (fan-in scaling keeps the
// initial logits near zero); biases and the output weights start at zero.
inline HeadParams init_params(int input_width, int hidden_width, std::uint64_t seed) {
    HeadParams p = HeadParams::zeros(input_width, hidden_width);
    rng::Generator gen(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_width));
    for (int i = 0; i < hidden_width; ++i) {
        for (int j = 0; j < input_width; ++j) {
            p.W1(i, j) = gen.next_double(-scale, scale);
        }
    }
    return p;
}

// Mini-batch Adam training with seeded init and seeded per-epoch shuffling.
// The logged loss is the mean per-example loss over each epoch, measured as
// the batches are processed.
inline TrainResult train(const std::vector<std::pair<Eigen::VectorXd, int>>& pooled_features,
                         const TrainConfig& config) {
    if (pooled_features.size() < 2) throw_data("train: need at least 2 examples");
    bool has_pos = false, has_neg = false;
    for (const auto& [x, y] : pooled_features) (y ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw_data("train: both classes must be present");
    if (config.epochs < 1) throw_data("train: epochs must be >= 1");
    if (config.batch_size < 1) throw_data("train: batch_size must be >= 1");
    if (!(config.threshold > 0.0 && config.threshold < 1.0)) throw_data("train: threshold must be in (0,1)");

    const int width = static_cast<int>(pooled_features.front().first.size());
    TrainResult result;
    result.params = init_params(width, config.hidden_width, rng::derive_seed(config.seed, 0));
    AdamHyper hyper;
    hyper.learning_rate = config.learning_rate;
    AdamState state = AdamState::fresh(width, config.hidden_width, hyper);
    rng::Generator shuffle_gen(rng::derive_seed(config.seed, 1));

    std::vector<std::size_t> order(pooled_features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        rng::shuffle(order, shuffle_gen);
        double loss_sum = 0.0;
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(config.batch_size));
            std::vector<std::pair<Eigen::VectorXd, int>> batch;
            batch.reserve(end - pos);
            for (std::size_t i = pos; i < end; ++i) batch.push_back(pooled_features[order[i]]);
            for (const auto& [x, y] : batch) loss_sum += bce_loss(forward(result.params, x), y);
            const HeadParams g = gradients(result.params, batch);
            adam_step(result.params, g, state);
        }
        const auto t1 = std::chrono::steady_clock::now();
        EpochLog log;
        log.epoch = epoch + 1;
        log.mean_loss = loss_sum / static_cast<double>(pooled_features.size());
        log.seconds = std::chrono::duration<double>(t1 - t0).count();
        result.log.push_back(log);
    }
    return result;
}

struct Prediction {
    double score = 0.0;
    bool positive = false;  // clickbait iff score >= threshold
};

inline std::vector<Prediction> predict(const HeadParams& params,
                                       const std::vector<Eigen::VectorXd>& pooled_features,
                                       double threshold) {
    std::vector<Prediction> out;
    out.reserve(pooled_features.size());
    for (const auto& x : pooled_features) {
        Prediction p;
        p.score = forward(params, x);
        p.positive = p.score >= threshold;
        out.push_back(p);
    }
    return out;
}

// Params file: magic, version, input width, hidden width, then the tensors
// as row-major 64-bit floats in the order W1, b1, w2, b2.
namespace detail {
constexpr char kParamsMagic[4] = {'C', 'D', 'H', 'P'};
constexpr std::uint32_t kParamsVersion = 1;
} // namespace detail

inline void save_params(const HeadParams& params, const std::filesystem::path& path) {
    std::string buf;
    buf.append(detail::kParamsMagic, 4);
    serialize::put_u32(buf, detail::kParamsVersion);
    serialize::put_u32(buf, static_cast<std::uint32_t>(params.input_width()));
    serialize::put_u32(buf, static_cast<std::uint32_t>(params.hidden_width()));
    for (Eigen::Index i = 0; i < params.W1.rows(); ++i)
        for (Eigen::Index j = 0; j < params.W1.cols(); ++j) serialize::put_f64(buf, params.W1(i, j));
    for (Eigen::Index i = 0; i < params.b1.size(); ++i) serialize::put_f64(buf, params.b1[i]);
    for (Eigen::Index i = 0; i < params.w2.size(); ++i) serialize::put_f64(buf, params.w2[i]);
    serialize::put_f64(buf, params.b2);
    serialize::write_file_atomic(path, buf);
}

inline HeadParams load_params(const std::filesystem::path& path,
                              std::optional<int> expected_input_width = std::nullopt) {
    const std::string data = serialize::read_file(path);
    serialize::Reader r(data.data(), data.size(), path.string());
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, detail::kParamsMagic, 4) != 0) {
        throw_data(path.string() + ": not a head params file (bad magic)");
    }
    const auto version = r.get_u32();
    if (version != detail::kParamsVersion) {
        throw_data(path.string() + ": unsupported params version " + std::to_string(version));
    }
    const auto width = static_cast<int>(r.get_u32());
    const auto hidden = static_cast<int>(r.get_u32());
    if (width < 1 || hidden < 1) throw_data(path.string() + ": invalid dimensions");
    if (expected_input_width && *expected_input_width != width) {
        throw_data(path.string() + ": params were trained for input width " + std::to_string(width) +
                   " but the backend provides " + std::to_string(*expected_input_width));
    }
    HeadParams p = HeadParams::zeros(width, hidden);
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < width; ++j) p.W1(i, j) = r.get_f64();
    for (int i = 0; i < hidden; ++i) p.b1[i] = r.get_f64();
    for (int i = 0; i < hidden; ++i) p.w2[i] = r.get_f64();
    p.b2 = r.get_f64();
    if (!r.at_end()) throw_data(path.string() + ": trailing bytes after params");
    return p;
}

} // namespace clickdet::head
