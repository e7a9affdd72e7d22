#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clickdet/baseline.hpp"
#include "clickdet/corpus.hpp"
#include "clickdet/embed.hpp"
#include "clickdet/eval.hpp"
#include "clickdet/head.hpp"
#include "clickdet/preprocess.hpp"
#include "clickdet/stopwords.hpp"

namespace clickdet::pipeline {

// normalize -> stopword removal -> WordPiece -> fixed-length encode
inline std::vector<preprocess::TokenSequence> encode_dataset(const corpus::LabeledDataset& ds,
                                                             const preprocess::Vocab& vocab,
                                                             const stopwords::StopwordSet& stop,
                                                             int max_len) {
    std::vector<preprocess::TokenSequence> out;
    out.reserve(ds.size());
    for (const auto& rec : ds.records) {
        out.push_back(preprocess::encode_text(rec.title, vocab, stop, max_len));
    }
    return out;
}

// Frozen-encoder (or hash) embeddings pooled into per-headline vectors, then
// the trainable MLP head. The optional cache directory lets the expensive
// encoder run once per distinct headline across folds.
class EmbedHeadPipeline final : public eval::Classifier {
public:
    EmbedHeadPipeline(std::shared_ptr<const preprocess::Vocab> vocab,
                      stopwords::StopwordSet stop,
                      std::shared_ptr<const embed::EmbeddingBackend> backend, int max_len,
                      head::TrainConfig train_config,
                      std::optional<std::filesystem::path> cache_dir = std::nullopt)
        : vocab_(std::move(vocab)),
          stop_(std::move(stop)),
          backend_(std::move(backend)),
          max_len_(max_len),
          train_config_(train_config),
          cache_dir_(std::move(cache_dir)) {}

    std::string name() const override { return "mbert-head[" + backend_->name() + "]"; }

    std::vector<Eigen::VectorXd> pooled_features(const corpus::LabeledDataset& ds) const {
        const auto sequences = encode_dataset(ds, *vocab_, stop_, max_len_);
        const auto embeddings = cache_dir_ ? embed::cached_embed(*backend_, *cache_dir_, sequences)
                                           : embed::embed_batch(*backend_, sequences);
        std::vector<Eigen::VectorXd> pooled;
        pooled.reserve(embeddings.size());
        for (const auto& emb : embeddings) pooled.push_back(head::masked_mean_pool(emb));
        return pooled;
    }

    void fit(const corpus::LabeledDataset& train, std::uint64_t seed) override {
        auto features = pooled_features(train);
        std::vector<std::pair<Eigen::VectorXd, int>> labeled;
        labeled.reserve(features.size());
        for (std::size_t i = 0; i < features.size(); ++i) {
            const int y = *train.records[i].final_label == corpus::Label::clickbait ? 1 : 0;
            labeled.emplace_back(std::move(features[i]), y);
        }
        head::TrainConfig cfg = train_config_;
        cfg.seed = seed;
        auto result = head::train(labeled, cfg);
        params_ = std::move(result.params);
        last_log_ = std::move(result.log);
        fitted_ = true;
    }

    std::vector<double> score_positive(const corpus::LabeledDataset& data) const override {
        if (!fitted_) throw_runtime("pipeline has not been fitted");
        const auto features = pooled_features(data);
        std::vector<double> scores;
        scores.reserve(features.size());
        for (const auto& x : features) scores.push_back(head::forward(params_, x));
        return scores;
    }

    const head::HeadParams& params() const {
        if (!fitted_) throw_runtime("pipeline has not been fitted");
        return params_;
    }

    void set_params(head::HeadParams p) {
        params_ = std::move(p);
        fitted_ = true;
    }

    const std::vector<head::EpochLog>& last_training_log() const { return last_log_; }
    const embed::EmbeddingBackend& backend() const { return *backend_; }

private:
    std::shared_ptr<const preprocess::Vocab> vocab_;
    stopwords::StopwordSet stop_;
    std::shared_ptr<const embed::EmbeddingBackend> backend_;
    int max_len_;
    head::TrainConfig train_config_;
    std::optional<std::filesystem::path> cache_dir_;
    head::HeadParams params_;
    std::vector<head::EpochLog> last_log_;
    bool fitted_ = false;
};

// TF-IDF vectors into gradient-boosted trees (the comparison model).
class TfidfGbtPipeline final : public eval::Classifier {
public:
    TfidfGbtPipeline(stopwords::StopwordSet stop, baseline::GbtConfig config = {})
        : stop_(std::move(stop)), config_(config) {}

    std::string name() const override { return "tfidf-gbt"; }

    std::string preprocess_title(const std::string& title) const {
        return preprocess::remove_stopwords(preprocess::normalize_text(title), stop_);
    }

    void fit(const corpus::LabeledDataset& train, std::uint64_t /*seed*/) override {
        std::vector<std::string> texts;
        std::vector<int> labels;
        texts.reserve(train.size());
        labels.reserve(train.size());
        for (const auto& rec : train.records) {
            texts.push_back(preprocess_title(rec.title));
            labels.push_back(*rec.final_label == corpus::Label::clickbait ? 1 : 0);
        }
        tfidf_ = baseline::tfidf_fit(texts);
        const auto X = baseline::tfidf_transform_all(tfidf_, texts);
        gbt_ = baseline::gbt_train(X, labels, config_).model;
        fitted_ = true;
    }

    std::vector<double> score_positive(const corpus::LabeledDataset& data) const override {
        if (!fitted_) throw_runtime("pipeline has not been fitted");
        std::vector<double> scores;
        scores.reserve(data.size());
        for (const auto& rec : data.records) {
            scores.push_back(baseline::gbt_score(gbt_, baseline::tfidf_transform(tfidf_, preprocess_title(rec.title))));
        }
        return scores;
    }

    const baseline::TfidfModel& tfidf() const { return tfidf_; }
    const baseline::GbtModel& gbt() const { return gbt_; }

    void set_models(baseline::TfidfModel tfidf, baseline::GbtModel gbt) {
        tfidf_ = std::move(tfidf);
        gbt_ = std::move(gbt);
        fitted_ = true;
    }

private:
    stopwords::StopwordSet stop_;
    baseline::GbtConfig config_;
    baseline::TfidfModel tfidf_;
    baseline::GbtModel gbt_;
    bool fitted_ = false;
};

// Fixed-score pipeline for harness checks.
class ConstantPipeline final : public eval::Classifier {
public:
    explicit ConstantPipeline(double score) : score_(score) {}
    std::string name() const override { return "constant"; }
    void fit(const corpus::LabeledDataset&, std::uint64_t) override {}
    std::vector<double> score_positive(const corpus::LabeledDataset& data) const override {
        return std::vector<double>(data.size(), score_);
    }

private:
    double score_;
};

} // namespace clickdet::pipeline
