#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written the slow, obvious way and shares
// no code with the implementation paths it verifies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

// Fleiss' kappa straight from the textbook formula, all in doubles.
inline double fleiss_kappa_direct(const std::vector<std::vector<std::int64_t>>& ratings) {
    const std::size_t n_items = ratings.size();
    const std::size_t n_cats = ratings.front().size();
    const double n = [&] {
        double t = 0;
        for (auto c : ratings.front()) t += static_cast<double>(c);
        return t;
    }();

    double p_bar = 0.0;
    for (const auto& row : ratings) {
        double pi = 0.0;
        for (auto c : row) pi += static_cast<double>(c) * (static_cast<double>(c) - 1.0);
        pi /= n * (n - 1.0);
        p_bar += pi;
    }
    p_bar /= static_cast<double>(n_items);

    double pe = 0.0;
    for (std::size_t j = 0; j < n_cats; ++j) {
        double pj = 0.0;
        for (const auto& row : ratings) pj += static_cast<double>(row[j]);
        pj /= static_cast<double>(n_items) * n;
        pe += pj * pj;
    }
    if (p_bar >= 1.0) return 1.0;
    return (p_bar - pe) / (1.0 - pe);
}

// Greedy longest-prefix WordPiece over a plain token set.
inline std::vector<std::string> wordpiece_greedy(const std::string& word,
                                                 const std::set<std::string>& vocab,
                                                 const std::string& cont_prefix,
                                                 const std::string& unk_token) {
    // code point starts
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < word.size();) {
        starts.push_back(i);
        const auto b = static_cast<unsigned char>(word[i]);
        if (b < 0x80) i += 1;
        else if ((b & 0xE0) == 0xC0) i += 2;
        else if ((b & 0xF0) == 0xE0) i += 3;
        else if ((b & 0xF8) == 0xF0) i += 4;
        else i += 1;
    }
    starts.push_back(word.size());

    std::vector<std::string> pieces;
    std::size_t pos = 0;
    const std::size_t n = starts.size() - 1;
    while (pos < n) {
        bool matched = false;
        for (std::size_t end = n; end > pos; --end) {
            std::string cand = word.substr(starts[pos], starts[end] - starts[pos]);
            if (pos > 0) cand = cont_prefix + cand;
            if (vocab.count(cand)) {
                pieces.push_back(cand);
                pos = end;
                matched = true;
                break;
            }
        }
        if (!matched) return {unk_token};
    }
    return pieces;
}

// AUC as the Mann-Whitney pairwise statistic: P(score_pos > score_neg),
// ties counted one half, over every positive-negative pair.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& is_positive) {
    double wins = 0.0;
    std::int64_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!is_positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (is_positive[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// Exhaustive best depth-1 split on a dense matrix: every feature, every
// midpoint between consecutive distinct values, gain computed by direct
// summation. First strict improvement wins in (feature, threshold) order.
struct StumpChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

inline StumpChoice best_stump_scan(const std::vector<std::vector<double>>& X,
                                   const std::vector<double>& g, const std::vector<double>& h,
                                   double min_gain) {
    StumpChoice best;
    const std::size_t n = X.size();
    const std::size_t d = X.front().size();
    double g_tot = 0.0, h_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g_tot += g[i];
        h_tot += h[i];
    }
    auto term = [](double gs, double hs) { return hs <= 1e-16 ? 0.0 : gs * gs / hs; };
    const double parent = term(g_tot, h_tot);

    for (std::size_t f = 0; f < d; ++f) {
        std::vector<double> values;
        for (std::size_t i = 0; i < n; ++i) values.push_back(X[i][f]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
            if (!(t > values[k]) || !(t <= values[k + 1])) continue;
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (X[i][f] < t) {
                    gl += g[i];
                    hl += h[i];
                }
            }
            const double gain = term(gl, hl) + term(g_tot - gl, h_tot - hl) - parent;
            if (gain > min_gain && (!best.found || gain > best.gain)) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = t;
                best.gain = gain;
            }
        }
    }
    return best;
}

// Central finite differences of the mean BCE loss with respect to every
// parameter of the two-layer head. Evaluates the loss through its own
// forward computation.
struct FdHead {
    Eigen::MatrixXd W1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2;
};

inline double fd_loss(const FdHead& p, const std::vector<std::pair<Eigen::VectorXd, int>>& batch) {
    double total = 0.0;
    for (const auto& [x, y] : batch) {
        Eigen::VectorXd z = p.W1 * x + p.b1;
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std::max(z[i], 0.0);
        const double logit = p.w2.dot(z) + p.b2;
        double prob = 1.0 / (1.0 + std::exp(-logit));
        prob = std::min(std::max(prob, 1e-7), 1.0 - 1e-7);
        total += y ? -std::log(prob) : -std::log(1.0 - prob);
    }
    return total / static_cast<double>(batch.size());
}

inline FdHead finite_difference_gradients(FdHead p,
                                          const std::vector<std::pair<Eigen::VectorXd, int>>& batch,
                                          double step) {
    FdHead grad = p;
    auto central = [&](double& slot) {
        const double keep = slot;
        slot = keep + step;
        const double up = fd_loss(p, batch);
        slot = keep - step;
        const double down = fd_loss(p, batch);
        slot = keep;
        return (up - down) / (2.0 * step);
    };
    for (Eigen::Index i = 0; i < p.W1.rows(); ++i)
        for (Eigen::Index j = 0; j < p.W1.cols(); ++j) grad.W1(i, j) = central(p.W1(i, j));
    for (Eigen::Index i = 0; i < p.b1.size(); ++i) grad.b1[i] = central(p.b1[i]);
    for (Eigen::Index i = 0; i < p.w2.size(); ++i) grad.w2[i] = central(p.w2[i]);
    grad.b2 = central(p.b2);
    return grad;
}

// Plain batch-gradient-descent logistic regression; returns the training
// accuracy reached. Used to certify that a synthetic fixture is actually
// linearly separable before the pipeline is asked to learn it.
inline double logistic_fit_accuracy(const std::vector<Eigen::VectorXd>& X,
                                    const std::vector<int>& y, int iterations = 500,
                                    double lr = 1.0) {
    const Eigen::Index d = X.front().size();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    double b = 0.0;
    const double n = static_cast<double>(X.size());
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
        double gb = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-(w.dot(X[i]) + b)));
            const double d_i = p - static_cast<double>(y[i]);
            gw += d_i * X[i];
            gb += d_i;
        }
        w -= lr / n * gw;
        b -= lr / n * gb;
    }
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-(w.dot(X[i]) + b)));
        if ((p >= 0.5 ? 1 : 0) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / n;
}

} // namespace oracles
