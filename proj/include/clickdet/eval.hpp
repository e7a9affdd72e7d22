#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "clickdet/corpus.hpp"
#include "clickdet/error.hpp"

namespace clickdet::eval {

using corpus::Label;

// Positive class = clickbait, everywhere.
struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // set when the corresponding denominator was zero and the metric was
    // reported as 0 by convention
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    bool f1_degenerate = false;
};

inline ConfusionMatrix confusion(const std::vector<Label>& preds, const std::vector<Label>& truth) {
    if (preds.size() != truth.size()) {
        throw_data("confusion: prediction/truth length mismatch (" + std::to_string(preds.size()) +
                   " vs " + std::to_string(truth.size()) + ")");
    }
    if (preds.empty()) throw_data("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::clickbait;
        const bool t = truth[i] == Label::clickbait;
        if (p && t) ++cm.tp;
        else if (p && !t) ++cm.fp;
        else if (!p && t) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

inline Metrics prf(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw_data("prf: empty confusion matrix");
    Metrics m;
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0) {
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    } else {
        m.precision_degenerate = true;
    }
    if (cm.tp + cm.fn > 0) {
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    } else {
        m.recall_degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.f1_degenerate = true;
    }
    return m;
}

// ROC curve swept over distinct scores descending; examples with equal
// scores enter together, which is what makes trapezoidal AUC equal the
// pairwise Mann-Whitney statistic with ties counted one half.
inline std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                        const std::vector<Label>& truth) {
    if (scores.size() != truth.size()) throw_data("roc_curve: scores/truth length mismatch");
    std::int64_t n_pos = 0, n_neg = 0;
    for (const Label l : truth) (l == Label::clickbait ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw_data("roc_curve: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (truth[order[i]] == Label::clickbait ? tp : fp)++;
            ++i;
        }
        points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos));
    }
    return points;
}

// Trapezoidal integration over fpr.
inline double auc(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw_data("auc: need at least 2 ROC points");
    if (points.front().first != 0.0 || points.front().second != 0.0 ||
        points.back().first != 1.0 || points.back().second != 1.0) {
        throw_data("auc: ROC points must start at (0,0) and end at (1,1)");
    }
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& [x0, y0] = points[i - 1];
        const auto& [x1, y1] = points[i];
        if (x1 < x0 || y1 < y0) throw_data("auc: ROC points must be non-decreasing");
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    return area;
}

struct FoldReport {
    int fold_index = 0;
    ConfusionMatrix confusion;
    Metrics metrics;
    std::vector<std::pair<double, double>> roc_points;
    double auc = 0.0;
};

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation over folds
};

struct ExperimentReport {
    std::vector<FoldReport> folds;
    MetricSummary accuracy, precision, recall, f1, auc;
    std::string config_snapshot;
    std::vector<std::pair<std::string, std::uint64_t>> seeds;
};

// A classifier pipeline the harness can fit and score. score_positive
// returns the clickbait probability per record.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string name() const = 0;
    virtual void fit(const corpus::LabeledDataset& train, std::uint64_t seed) = 0;
    virtual std::vector<double> score_positive(const corpus::LabeledDataset& data) const = 0;
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return s;
}

inline FoldReport evaluate_scores(int fold_index, const std::vector<double>& scores,
                                  const std::vector<Label>& truth, double threshold) {
    FoldReport report;
    report.fold_index = fold_index;
    std::vector<Label> preds;
    preds.reserve(scores.size());
    for (double s : scores) {
        preds.push_back(s >= threshold ? Label::clickbait : Label::non_clickbait);
    }
    report.confusion = confusion(preds, truth);
    report.metrics = prf(report.confusion);
    report.roc_points = roc_curve(scores, truth);
    report.auc = auc(report.roc_points);
    return report;
}

inline std::vector<Label> labels_of(const corpus::LabeledDataset& ds) {
    std::vector<Label> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records) out.push_back(*r.final_label);
    return out;
}

inline void aggregate(ExperimentReport& report) {
    std::vector<double> acc, prec, rec, f1, auc_v;
    for (const auto& f : report.folds) {
        acc.push_back(f.metrics.accuracy);
        prec.push_back(f.metrics.precision);
        rec.push_back(f.metrics.recall);
        f1.push_back(f.metrics.f1);
        auc_v.push_back(f.auc);
    }
    report.accuracy = summarize(acc);
    report.precision = summarize(prec);
    report.recall = summarize(rec);
    report.f1 = summarize(f1);
    report.auc = summarize(auc_v);
}

} // namespace detail

// k-fold cross-validation on a precomputed fold split. Per-fold train seeds
// derive from the master seed, so a shared split plus a shared seed gives
// paired, reproducible comparisons between pipelines.
inline ExperimentReport cross_validate_with_split(const corpus::LabeledDataset& dataset,
                                                  const corpus::FoldSplit& split,
                                                  Classifier& pipeline, std::uint64_t seed,
                                                  double threshold = 0.5) {
    ExperimentReport report;
    report.seeds.emplace_back("cross_validate", seed);
    for (int fold = 0; fold < split.k; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            (split.assignments[i] == fold ? test_idx : train_idx).push_back(i);
        }
        try {
            const auto train = corpus::take_indices(dataset, train_idx);
            const auto test = corpus::take_indices(dataset, test_idx);
            pipeline.fit(train, rng::derive_seed(seed, static_cast<std::uint64_t>(fold)));
            const auto scores = pipeline.score_positive(test);
            if (scores.size() != test.size()) throw_runtime("pipeline returned wrong score count");
            report.folds.push_back(
                detail::evaluate_scores(fold, scores, detail::labels_of(test), threshold));
        } catch (const Error& e) {
            throw Error(e.kind(), "fold " + std::to_string(fold) + ": " + e.what());
        }
    }
    detail::aggregate(report);
    return report;
}

inline ExperimentReport cross_validate(const corpus::LabeledDataset& dataset, Classifier& pipeline,
                                       int k, std::uint64_t seed, double threshold = 0.5) {
    const auto split = corpus::stratified_kfold(dataset, k, rng::derive_seed(seed, 0xF01D));
    return cross_validate_with_split(dataset, split, pipeline, seed, threshold);
}

// Single-report evaluation of an already-fitted pipeline on a labeled set.
inline FoldReport evaluate_holdout(const Classifier& pipeline, const corpus::LabeledDataset& holdout,
                                   double threshold = 0.5) {
    if (holdout.records.empty()) throw_data("evaluate_holdout: empty holdout set");
    const auto scores = pipeline.score_positive(holdout);
    if (scores.size() != holdout.size()) throw_runtime("pipeline returned wrong score count");
    return detail::evaluate_scores(0, scores, detail::labels_of(holdout), threshold);
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace detail

// CSV layout: one row per fold plus mean/stddev footer rows.
inline void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "fold,accuracy,precision,recall,f1,auc,tp,fp,fn,tn\n";
    for (const auto& f : report.folds) {
        out << (f.fold_index + 1) << ',' << detail::fmt(f.metrics.accuracy) << ','
            << detail::fmt(f.metrics.precision) << ',' << detail::fmt(f.metrics.recall) << ','
            << detail::fmt(f.metrics.f1) << ',' << detail::fmt(f.auc) << ',' << f.confusion.tp
            << ',' << f.confusion.fp << ',' << f.confusion.fn << ',' << f.confusion.tn << "\n";
    }
    out << "mean," << detail::fmt(report.accuracy.mean) << ',' << detail::fmt(report.precision.mean)
        << ',' << detail::fmt(report.recall.mean) << ',' << detail::fmt(report.f1.mean) << ','
        << detail::fmt(report.auc.mean) << ",,,,\n";
    out << "stddev," << detail::fmt(report.accuracy.stddev) << ','
        << detail::fmt(report.precision.stddev) << ',' << detail::fmt(report.recall.stddev) << ','
        << detail::fmt(report.f1.stddev) << ',' << detail::fmt(report.auc.stddev) << ",,,,\n";
}

inline void write_roc_csv(std::ostream& out, const ExperimentReport& report) {
    out << "fold,fpr,tpr\n";
    for (const auto& f : report.folds) {
        for (const auto& [fpr, tpr] : f.roc_points) {
            out << (f.fold_index + 1) << ',' << detail::fmt(fpr) << ',' << detail::fmt(tpr) << "\n";
        }
    }
}

inline void write_single_report_csv(std::ostream& out, const FoldReport& f) {
    out << "fold,accuracy,precision,recall,f1,auc,tp,fp,fn,tn\n";
    out << "holdout," << detail::fmt(f.metrics.accuracy) << ',' << detail::fmt(f.metrics.precision)
        << ',' << detail::fmt(f.metrics.recall) << ',' << detail::fmt(f.metrics.f1) << ','
        << detail::fmt(f.auc) << ',' << f.confusion.tp << ',' << f.confusion.fp << ','
        << f.confusion.fn << ',' << f.confusion.tn << "\n";
}

} // namespace clickdet::eval
