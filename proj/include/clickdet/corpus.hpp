#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "clickdet/csv.hpp"
#include "clickdet/error.hpp"
#include "clickdet/rng.hpp"
#include "clickdet/stopwords.hpp"
#include "clickdet/text.hpp"

namespace clickdet::corpus {

enum class Label : std::uint8_t { non_clickbait = 0, clickbait = 1 };

inline const char* to_string(Label l) {
    return l == Label::clickbait ? "clickbait" : "non-clickbait";
}

inline Label opposite(Label l) {
    return l == Label::clickbait ? Label::non_clickbait : Label::clickbait;
}

inline Label parse_label(std::string_view s) {
    const std::string low = text::lower_ascii(s);
    if (low == "clickbait") return Label::clickbait;
    if (low == "non-clickbait") return Label::non_clickbait;
    throw_data("unknown label '" + std::string(s) + "' (expected 'clickbait' or 'non-clickbait')");
}

// One headline with its per-rater labels. final_label is set only once
// unanimity has been established.
struct HeadlineRecord {
    std::string id;
    std::string title;
    std::vector<Label> rater_labels;
    std::optional<Label> final_label;
};

struct LabeledDataset {
    std::vector<HeadlineRecord> records;  // every record has final_label
    std::string provenance;
    std::vector<std::pair<std::string, std::uint64_t>> seed_log;

    std::size_t size() const { return records.size(); }

    std::size_t count(Label l) const {
        std::size_t n = 0;
        for (const auto& r : records)
            if (r.final_label && *r.final_label == l) ++n;
        return n;
    }
};

struct FoldSplit {
    int k = 0;
    std::vector<int> assignments;  // per-record fold index in [0, k)
};

enum class Schema { clickid_json, simple_csv };

inline Schema parse_schema(std::string_view s) {
    if (s == "clickid-json") return Schema::clickid_json;
    if (s == "simple-csv") return Schema::simple_csv;
    throw_config("unknown ingestion schema '" + std::string(s) + "'");
}

namespace detail {

// CLICK-ID publishes three ratings per headline; label_score is the number
// of raters who chose the stated label.
constexpr int kClickIdRaters = 3;

inline std::string trimmed(const std::string& s) {
    return text::collapse_whitespace(s);
}

inline HeadlineRecord record_from_json(const nlohmann::json& obj, const std::string& where) {
    if (!obj.is_object()) throw_data(where + ": expected a JSON object");
    HeadlineRecord rec;
    if (auto it = obj.find("id"); it != obj.end()) {
        if (it->is_string()) rec.id = it->get<std::string>();
        else if (it->is_number_integer()) rec.id = std::to_string(it->get<std::int64_t>());
        else throw_data(where + ": field 'id' must be a string");
    } else {
        throw_data(where + ": missing field 'id'");
    }
    if (auto it = obj.find("title"); it != obj.end() && it->is_string()) {
        rec.title = it->get<std::string>();
    } else {
        throw_data(where + ": missing or non-string field 'title'");
    }
    if (trimmed(rec.title).empty()) throw_data(where + ": title is empty");

    Label label;
    if (auto it = obj.find("label"); it != obj.end() && it->is_string()) {
        try {
            label = parse_label(it->get<std::string>());
        } catch (const Error& e) {
            throw_data(where + ": " + e.what());
        }
    } else {
        throw_data(where + ": missing or non-string field 'label'");
    }

    int score = 0;
    if (auto it = obj.find("label_score"); it != obj.end() && it->is_number_integer()) {
        score = it->get<int>();
    } else {
        throw_data(where + ": missing or non-integer field 'label_score'");
    }
    if (score < 1 || score > kClickIdRaters) {
        throw_data(where + ": label_score " + std::to_string(score) + " outside [1, " +
                   std::to_string(kClickIdRaters) + "]");
    }
    rec.rater_labels.assign(static_cast<std::size_t>(score), label);
    rec.rater_labels.resize(kClickIdRaters, opposite(label));
    return rec;
}

inline std::vector<HeadlineRecord> load_clickid_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open dataset file: " + path.string());

    // Accept both a top-level JSON array and one JSON object per line.
    char first = 0;
    while (in.get(first) && (first == ' ' || first == '\t' || first == '\n' || first == '\r')) {}
    const bool is_array = in && first == '[';
    in.clear();
    in.seekg(0);

    std::vector<HeadlineRecord> records;
    if (is_array) {
        nlohmann::json root;
        try {
            root = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw_data(path.string() + ": " + e.what());
        }
        for (std::size_t i = 0; i < root.size(); ++i) {
            records.push_back(record_from_json(root[i], path.string() + ": record " + std::to_string(i)));
        }
    } else {
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::size_t start = line.find_first_not_of(" \t\r");
            if (start == std::string::npos) continue;
            const std::string where = path.string() + ":" + std::to_string(line_no);
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw_data(where + ": " + e.what());
            }
            records.push_back(record_from_json(obj, where));
        }
    }
    return records;
}

inline std::vector<HeadlineRecord> load_simple_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open dataset file: " + path.string());
    csv::Parser parser(in, path.string());
    csv::Record rec;
    if (!parser.next(rec)) return {};  // empty file -> empty list

    auto strip_bom = [](std::string& s) {
        if (s.size() >= 3 && s[0] == '\xEF' && s[1] == '\xBB' && s[2] == '\xBF') s.erase(0, 3);
    };
    if (!rec.fields.empty()) strip_bom(rec.fields[0]);
    if (rec.fields.size() != 3 || text::lower_ascii(rec.fields[0]) != "id" ||
        text::lower_ascii(rec.fields[1]) != "title" || text::lower_ascii(rec.fields[2]) != "label") {
        throw_data(path.string() + ": expected CSV header 'id,title,label'");
    }

    std::vector<HeadlineRecord> records;
    while (parser.next(rec)) {
        if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
        const std::string where = path.string() + ":" + std::to_string(rec.line);
        if (rec.fields.size() != 3) {
            throw_data(where + ": expected 3 fields, got " + std::to_string(rec.fields.size()));
        }
        HeadlineRecord r;
        r.id = rec.fields[0];
        r.title = rec.fields[1];
        if (trimmed(r.title).empty()) throw_data(where + ": title is empty");
        Label label;
        try {
            label = parse_label(rec.fields[2]);
        } catch (const Error& e) {
            throw_data(where + ": " + e.what());
        }
        r.rater_labels = {label};
        r.final_label = label;
        records.push_back(std::move(r));
    }
    return records;
}

inline void check_unique_ids(const std::vector<HeadlineRecord>& records) {
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());
    for (const auto& r : records) {
        if (!seen.insert(r.id).second) throw_data("duplicate record id '" + r.id + "'");
    }
}

} // namespace detail

// Titles are preserved verbatim; no normalization happens at ingestion.
inline std::vector<HeadlineRecord> load_dataset(const std::filesystem::path& path, Schema schema) {
    switch (schema) {
        case Schema::clickid_json: return detail::load_clickid_json(path);
        case Schema::simple_csv: return detail::load_simple_csv(path);
    }
    throw_config("unhandled schema");
}

inline std::vector<HeadlineRecord> load_dataset(const std::filesystem::path& path, std::string_view schema) {
    return load_dataset(path, parse_schema(schema));
}

// Keeps exactly the records whose raters were unanimous and stamps
// final_label with the agreed class; everything else is dropped (the count
// is recorded in the provenance note).
inline LabeledDataset filter_full_agreement(const std::vector<HeadlineRecord>& records,
                                            std::string provenance = std::string()) {
    LabeledDataset out;
    out.records.reserve(records.size());
    for (const auto& r : records) {
        if (r.rater_labels.empty()) throw_data("record '" + r.id + "' has no rater labels");
        const Label first = r.rater_labels.front();
        const bool unanimous = std::all_of(r.rater_labels.begin(), r.rater_labels.end(),
                                           [&](Label l) { return l == first; });
        if (!unanimous) continue;
        HeadlineRecord kept = r;
        kept.final_label = first;
        out.records.push_back(std::move(kept));
    }
    detail::check_unique_ids(out.records);
    const std::size_t dropped = records.size() - out.records.size();
    out.provenance = provenance.empty() ? std::string() : provenance + "; ";
    out.provenance += "full-agreement filter kept " + std::to_string(out.records.size()) +
                      " of " + std::to_string(records.size()) + " (dropped " +
                      std::to_string(dropped) + ")";
    return out;
}

// Fleiss' kappa over an items x categories matrix of rating counts. Every
// item must carry the same number of ratings n >= 2. Unanimous input returns
// exactly 1.0; a single-category matrix with imperfect agreement has no
// defined chance correction and errors out.
inline double fleiss_kappa(const std::vector<std::vector<std::int64_t>>& ratings) {
    if (ratings.empty()) throw_data("fleiss_kappa: no items");
    const std::size_t n_items = ratings.size();
    const std::size_t n_cats = ratings.front().size();
    if (n_cats == 0) throw_data("fleiss_kappa: no categories");

    std::int64_t per_item = -1;
    std::int64_t pair_sum = 0;  // sum over items of sum_j n_ij * (n_ij - 1)
    std::vector<std::int64_t> cat_totals(n_cats, 0);

    for (std::size_t i = 0; i < n_items; ++i) {
        const auto& row = ratings[i];
        if (row.size() != n_cats) throw_data("fleiss_kappa: ragged ratings matrix");
        std::int64_t total = 0;
        for (std::size_t j = 0; j < n_cats; ++j) {
            if (row[j] < 0) throw_data("fleiss_kappa: negative rating count");
            total += row[j];
            cat_totals[j] += row[j];
            pair_sum += row[j] * (row[j] - 1);
        }
        if (per_item < 0) per_item = total;
        else if (total != per_item)
            throw_data("fleiss_kappa: item " + std::to_string(i) + " has " + std::to_string(total) +
                       " ratings, expected " + std::to_string(per_item));
    }
    if (per_item < 2) throw_data("fleiss_kappa: need at least 2 ratings per item");

    const std::int64_t n = per_item;
    const std::int64_t full_agreement = static_cast<std::int64_t>(n_items) * n * (n - 1);
    if (pair_sum == full_agreement) return 1.0;  // unanimous, exact by integer arithmetic

    const double grand_total = static_cast<double>(n_items) * static_cast<double>(n);
    double pe = 0.0;
    bool single_category = false;
    for (std::size_t j = 0; j < n_cats; ++j) {
        const double pj = static_cast<double>(cat_totals[j]) / grand_total;
        pe += pj * pj;
        if (cat_totals[j] == static_cast<std::int64_t>(grand_total)) single_category = true;
    }
    if (single_category) {
        throw_data("fleiss_kappa: undefined (all ratings in one category but agreement below 1)");
    }
    const double p_bar = static_cast<double>(pair_sum) / static_cast<double>(full_agreement);
    return (p_bar - pe) / (1.0 - pe);
}

// Downsamples the majority class (without replacement) to the minority size.
// Record order is preserved; the draw is reproducible from the seed, which
// is appended to the dataset's seed log.
inline LabeledDataset balance_undersample(const LabeledDataset& dataset, std::uint64_t seed) {
    const std::size_t n_click = dataset.count(Label::clickbait);
    const std::size_t n_non = dataset.count(Label::non_clickbait);
    if (n_click == 0 || n_non == 0) throw_data("balance_undersample: both classes must be present");

    LabeledDataset out;
    out.provenance = dataset.provenance;
    out.seed_log = dataset.seed_log;
    out.seed_log.emplace_back("balance_undersample", seed);

    if (n_click == n_non) {
        out.records = dataset.records;
        return out;
    }

    const Label majority = n_click > n_non ? Label::clickbait : Label::non_clickbait;
    const std::size_t minority_size = std::min(n_click, n_non);

    std::vector<std::size_t> majority_idx;
    majority_idx.reserve(std::max(n_click, n_non));
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (*dataset.records[i].final_label == majority) majority_idx.push_back(i);
    }

    rng::Generator gen(seed);
    const auto picks = rng::sample_indices(majority_idx.size(), minority_size, gen);
    std::vector<char> keep(dataset.records.size(), 0);
    for (auto p : picks) keep[majority_idx[p]] = 1;

    out.records.reserve(2 * minority_size);
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        if (*dataset.records[i].final_label != majority || keep[i]) {
            out.records.push_back(dataset.records[i]);
        }
    }
    return out;
}

// Stratified k-fold assignment: each class is shuffled and dealt round-robin,
// with the fold counter carrying over between classes so the remainders land
// in different folds.
inline FoldSplit stratified_kfold(const LabeledDataset& dataset, int k, std::uint64_t seed) {
    if (k < 2) throw_data("stratified_kfold: k must be at least 2, got " + std::to_string(k));
    for (Label l : {Label::non_clickbait, Label::clickbait}) {
        const std::size_t n = dataset.count(l);
        if (n < static_cast<std::size_t>(k)) {
            throw_data(std::string("stratified_kfold: class '") + to_string(l) + "' has " +
                       std::to_string(n) + " records, fewer than k=" + std::to_string(k));
        }
    }

    FoldSplit split;
    split.k = k;
    split.assignments.assign(dataset.records.size(), -1);

    rng::Generator gen(seed);
    int fold = 0;
    for (Label l : {Label::non_clickbait, Label::clickbait}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            if (*dataset.records[i].final_label == l) idx.push_back(i);
        }
        rng::shuffle(idx, gen);
        for (auto i : idx) {
            split.assignments[i] = fold;
            fold = (fold + 1) % k;
        }
    }
    return split;
}

// Subset of the dataset given record indices (order of `indices` preserved).
inline LabeledDataset take_indices(const LabeledDataset& dataset, const std::vector<std::size_t>& indices) {
    LabeledDataset out;
    out.provenance = dataset.provenance;
    out.seed_log = dataset.seed_log;
    out.records.reserve(indices.size());
    for (auto i : indices) out.records.push_back(dataset.records.at(i));
    return out;
}

struct WordFrequencies {
    std::map<std::string, std::int64_t> counts;
    std::int64_t stopword_hits = 0;
    std::int64_t punctuation_only_tokens = 0;
    std::int64_t total_word_tokens = 0;  // counted words + stopword hits + punctuation-only
};

// Bag-of-words statistics for one class slice. Words are maximal letter runs
// (Unicode-aware); a whitespace token without any letters counts as a
// punctuation-only token. This splitter is for descriptive statistics and the
// TF-IDF baseline, not for model tokenization.
inline WordFrequencies word_frequencies(const LabeledDataset& dataset, Label cls,
                                        const stopwords::StopwordSet& stop = {},
                                        bool lowercase = true) {
    if (dataset.records.empty()) throw_data("word_frequencies: dataset is empty");
    WordFrequencies out;
    for (const auto& rec : dataset.records) {
        if (*rec.final_label != cls) continue;
        for (const auto& token : text::split_whitespace(rec.title)) {
            const auto runs = text::letter_runs(token);
            if (runs.empty()) {
                ++out.punctuation_only_tokens;
                continue;
            }
            for (const auto& run : runs) {
                if (stop.contains(run)) {
                    ++out.stopword_hits;
                } else {
                    ++out.counts[lowercase ? text::lower_ascii(run) : run];
                }
            }
        }
    }
    out.total_word_tokens = out.stopword_hits + out.punctuation_only_tokens;
    for (const auto& [w, c] : out.counts) out.total_word_tokens += c;
    return out;
}

// Top-k by count, descending; ties broken lexicographically ascending.
inline std::vector<std::pair<std::string, std::int64_t>>
top_k_words(const std::map<std::string, std::int64_t>& frequencies, std::size_t k) {
    if (k < 1) throw_data("top_k_words: k must be >= 1");
    std::vector<std::pair<std::string, std::int64_t>> items(frequencies.begin(), frequencies.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > k) items.resize(k);
    return items;
}

} // namespace clickdet::corpus
