#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "clickdet/error.hpp"
#include "clickdet/stopwords.hpp"
#include "clickdet/text.hpp"

namespace clickdet::preprocess {

// Subword vocabulary in the standard one-token-per-line format: the 0-based
// line number is the token id. Continuation pieces carry the "##" prefix.
struct Vocab {
    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;
    int pad_id = -1;
    int unk_id = -1;
    int cls_id = -1;
    int sep_id = -1;
    std::string continuation_prefix = "##";

    int size() const { return static_cast<int>(id_to_token.size()); }

    int lookup(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? unk_id : it->second;
    }

    bool contains(const std::string& token) const { return token_to_id.count(token) > 0; }
};

inline Vocab load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open vocab file: " + path.string());
    Vocab v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            throw_data(path.string() + ":" + std::to_string(line_no) + ": empty token");
        }
        auto [it, inserted] = v.token_to_id.emplace(line, static_cast<int>(line_no));
        if (!inserted) {
            throw_data(path.string() + ": duplicate token '" + line + "' at lines " +
                       std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        v.id_to_token.push_back(line);
        ++line_no;
    }
    auto resolve = [&](const char* name) {
        auto it = v.token_to_id.find(name);
        if (it == v.token_to_id.end())
            throw_data(path.string() + ": vocab is missing special token " + std::string(name));
        return it->second;
    };
    v.pad_id = resolve("[PAD]");
    v.unk_id = resolve("[UNK]");
    v.cls_id = resolve("[CLS]");
    v.sep_id = resolve("[SEP]");
    return v;
}

// Encoder-ready fixed-length sequence. ids[0] is always [CLS], the last
// non-pad slot is [SEP], the mask flags non-pad positions.
struct TokenSequence {
    std::vector<int> ids;
    std::vector<std::uint8_t> attention_mask;
    int original_length = 0;  // non-pad count

    int length() const { return static_cast<int>(ids.size()); }
};

// Canonical composition (Latin sequences), whitespace collapsed to single
// spaces, ends trimmed. Case is preserved; the encoder vocabulary is cased.
inline std::string normalize_text(const std::string& raw) {
    return text::collapse_whitespace(text::compose_nfc_latin(raw));
}

// Deletes whole words matching the stopword set (case-insensitive) and
// rejoins the survivors with single spaces. Runs on raw words before subword
// splitting, so only whole-word stopwords are ever removed.
inline std::string remove_stopwords(const std::string& normalized_text,
                                    const stopwords::StopwordSet& stop) {
    std::string out;
    for (const auto& word : text::split_whitespace(normalized_text)) {
        if (stop.contains(word)) continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

// Greedy longest-match-first subword segmentation. Each whitespace word is
// scanned left to right, repeatedly taking the longest vocabulary prefix;
// non-initial pieces are looked up with the continuation prefix. A word with
// no valid segmentation becomes the single [UNK] token.
inline std::vector<std::string> wordpiece_tokenize(const std::string& normalized_text,
                                                   const Vocab& vocab) {
    std::vector<std::string> out;
    const std::string& unk = vocab.id_to_token[static_cast<std::size_t>(vocab.unk_id)];

    for (const auto& word : text::split_whitespace(normalized_text)) {
        // code point boundaries so candidate pieces are always valid UTF-8
        std::vector<std::size_t> bounds;
        bounds.push_back(0);
        for (std::size_t i = 0; i < word.size();) {
            i += static_cast<std::size_t>(text::utf8_decode(word, i).nbytes);
            bounds.push_back(i);
        }
        const std::size_t n = bounds.size() - 1;  // code point count

        std::vector<std::string> pieces;
        bool bad = false;
        std::size_t start = 0;
        while (start < n) {
            std::size_t end = n;
            std::string match;
            while (end > start) {
                std::string piece = word.substr(bounds[start], bounds[end] - bounds[start]);
                if (start > 0) piece = vocab.continuation_prefix + piece;
                if (vocab.contains(piece)) {
                    match = std::move(piece);
                    break;
                }
                --end;
            }
            if (match.empty()) {
                bad = true;
                break;
            }
            pieces.push_back(std::move(match));
            start = end;
        }
        if (bad) {
            out.push_back(unk);
        } else {
            for (auto& p : pieces) out.push_back(std::move(p));
        }
    }
    return out;
}

// [CLS] + tokens (truncated to max_len - 2) + [SEP], padded to max_len.
inline TokenSequence encode_sequence(const std::vector<std::string>& tokens,
                                     const Vocab& vocab, int max_len) {
    if (max_len < 3) throw_data("encode_sequence: max_len must be >= 3, got " + std::to_string(max_len));
    const std::size_t keep = std::min(tokens.size(), static_cast<std::size_t>(max_len - 2));

    TokenSequence seq;
    seq.ids.reserve(static_cast<std::size_t>(max_len));
    seq.ids.push_back(vocab.cls_id);
    for (std::size_t i = 0; i < keep; ++i) seq.ids.push_back(vocab.lookup(tokens[i]));
    seq.ids.push_back(vocab.sep_id);
    seq.original_length = static_cast<int>(seq.ids.size());
    seq.ids.resize(static_cast<std::size_t>(max_len), vocab.pad_id);

    seq.attention_mask.assign(static_cast<std::size_t>(max_len), 0);
    for (int i = 0; i < seq.original_length; ++i) seq.attention_mask[static_cast<std::size_t>(i)] = 1;
    return seq;
}

// Full text -> encoder input convenience path used by the pipelines.
inline TokenSequence encode_text(const std::string& raw_title, const Vocab& vocab,
                                 const stopwords::StopwordSet& stop, int max_len) {
    const std::string cleaned = remove_stopwords(normalize_text(raw_title), stop);
    return encode_sequence(wordpiece_tokenize(cleaned, vocab), vocab, max_len);
}

} // namespace clickdet::preprocess
