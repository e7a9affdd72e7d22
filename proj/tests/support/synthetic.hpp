#pragma once

// Synthetic headline corpus with class-correlated tokens. Clickbait titles
// draw mostly from one word pool, non-clickbait from another, with a shared
// pool mixed into both; pooled hash embeddings of the two classes then form
// two separable clusters.

#include <string>
#include <vector>

#include "clickdet/corpus.hpp"
#include "clickdet/rng.hpp"

namespace testsupport {

inline std::vector<std::string> synthetic_click_pool() {
    std::vector<std::string> v;
    for (int i = 0; i < 20; ++i) v.push_back("heboh" + std::to_string(i));
    return v;
}

inline std::vector<std::string> synthetic_news_pool() {
    std::vector<std::string> v;
    for (int i = 0; i < 20; ++i) v.push_back("resmi" + std::to_string(i));
    return v;
}

inline std::vector<std::string> synthetic_shared_pool() {
    std::vector<std::string> v;
    for (int i = 0; i < 10; ++i) v.push_back("kata" + std::to_string(i));
    return v;
}

// One token per line, specials first: loadable by preprocess::load_vocab.
inline std::string synthetic_vocab_text() {
    std::string out = "[PAD]\n[UNK]\n[CLS]\n[SEP]\n";
    for (const auto& w : synthetic_click_pool()) out += w + "\n";
    for (const auto& w : synthetic_news_pool()) out += w + "\n";
    for (const auto& w : synthetic_shared_pool()) out += w + "\n";
    return out;
}

inline clickdet::corpus::LabeledDataset make_synthetic_dataset(std::size_t n_records,
                                                               std::uint64_t seed) {
    using clickdet::corpus::HeadlineRecord;
    using clickdet::corpus::Label;

    const auto click = synthetic_click_pool();
    const auto news = synthetic_news_pool();
    const auto shared = synthetic_shared_pool();

    clickdet::rng::Generator gen(seed);
    clickdet::corpus::LabeledDataset ds;
    ds.provenance = "synthetic corpus, seed " + std::to_string(seed);
    ds.seed_log.emplace_back("synthetic", seed);

    for (std::size_t i = 0; i < n_records; ++i) {
        const Label label = i % 2 == 0 ? Label::clickbait : Label::non_clickbait;
        const auto& own = label == Label::clickbait ? click : news;
        const auto& other = label == Label::clickbait ? news : click;

        const std::size_t words = 6 + gen.next_below(5);
        std::string title;
        for (std::size_t w = 0; w < words; ++w) {
            const double r = gen.next_double();
            const auto& pool = r < 0.75 ? own : (r < 0.85 ? other : shared);
            if (!title.empty()) title += ' ';
            title += pool[gen.next_below(pool.size())];
        }

        HeadlineRecord rec;
        rec.id = "syn" + std::to_string(i);
        rec.title = title;
        rec.rater_labels = {label, label, label};
        rec.final_label = label;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// simple-csv rendering of a dataset (for driving the CLI end to end).
inline std::string to_simple_csv(const clickdet::corpus::LabeledDataset& ds) {
    std::string out = "id,title,label\n";
    for (const auto& r : ds.records) {
        out += r.id + "," + r.title + "," + clickdet::corpus::to_string(*r.final_label) + "\n";
    }
    return out;
}

} // namespace testsupport
