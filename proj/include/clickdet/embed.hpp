#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "clickdet/error.hpp"
#include "clickdet/preprocess.hpp"
#include "clickdet/rng.hpp"
#include "clickdet/serialize.hpp"

namespace clickdet::embed {

// Per-token dense vectors for one headline, stored row-major as 32-bit
// floats. 32-bit is the pipeline's embedding precision: it is what the
// cache persists, so cached and freshly computed values compare bit-equal.
struct EmbeddingSequence {
    int rows = 0;  // sequence length L
    int cols = 0;  // hidden width H
    std::vector<float> values;               // rows * cols, row-major
    std::vector<std::uint8_t> mask;          // copied from the input sequence

    const float* row(int i) const { return values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols); }
    float* row(int i) { return values.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols); }
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    virtual std::string name() const = 0;
    virtual int hidden_width() const = 0;
    virtual bool deterministic() const = 0;

    // One output per input, same order; masks are copied through by the
    // caller (embed_batch), implementations only fill rows/cols/values.
    virtual std::vector<EmbeddingSequence> run(const std::vector<preprocess::TokenSequence>& sequences) const = 0;
};

// Model-free test backend: every token id maps to a fixed pseudo-random
// unit-norm vector derived from (seed, id). Position-independent and fully
// deterministic.
class HashBackend final : public EmbeddingBackend {
public:
    HashBackend(int width, std::uint64_t seed) : width_(width), seed_(seed) {
        if (width < 1) throw_config("hash backend width must be >= 1");
    }

    std::string name() const override {
        return "hash:" + std::to_string(width_) + ":" + std::to_string(seed_);
    }

    int hidden_width() const override { return width_; }
    bool deterministic() const override { return true; }

    std::vector<EmbeddingSequence> run(const std::vector<preprocess::TokenSequence>& sequences) const override {
        std::vector<EmbeddingSequence> out(sequences.size());
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            const auto& seq = sequences[s];
            auto& emb = out[s];
            emb.rows = seq.length();
            emb.cols = width_;
            emb.values.resize(static_cast<std::size_t>(emb.rows) * static_cast<std::size_t>(width_));
            for (int i = 0; i < emb.rows; ++i) {
                token_vector(seq.ids[static_cast<std::size_t>(i)], emb.row(i));
            }
        }
        return out;
    }

    // Exposed for direct inspection in tests.
    std::vector<float> vector_for(int token_id) const {
        std::vector<float> v(static_cast<std::size_t>(width_));
        token_vector(token_id, v.data());
        return v;
    }

private:
    void token_vector(int token_id, float* dst) const {
        std::uint64_t state = seed_ ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(token_id)) * 0x9e3779b97f4a7c15ull);
        rng::splitmix64(state);
        std::vector<double> raw(static_cast<std::size_t>(width_));
        double norm_sq = 0.0;
        for (int j = 0; j < width_; ++j) {
            const double u = static_cast<double>(rng::splitmix64(state) >> 11) * 0x1.0p-53;
            raw[static_cast<std::size_t>(j)] = 2.0 * u - 1.0;
            norm_sq += raw[static_cast<std::size_t>(j)] * raw[static_cast<std::size_t>(j)];
        }
        if (norm_sq < 1e-30) {
            raw[0] = 1.0;
            norm_sq = 1.0;
        }
        // Normalize in double, quantize to f32, then rescale once so the
        // norm of the stored f32 values stays at the f32 rounding floor.
        double inv = 1.0 / std::sqrt(norm_sq);
        for (int j = 0; j < width_; ++j)
            dst[j] = static_cast<float>(raw[static_cast<std::size_t>(j)] * inv);
        double post = 0.0;
        for (int j = 0; j < width_; ++j) post += static_cast<double>(dst[j]) * static_cast<double>(dst[j]);
        inv = 1.0 / std::sqrt(post);
        for (int j = 0; j < width_; ++j)
            dst[j] = static_cast<float>(static_cast<double>(dst[j]) * inv);
    }

    int width_;
    std::uint64_t seed_;
};

// Shape/finiteness-checked batch embedding. Output order always matches
// input order regardless of any parallelism inside the backend.
inline std::vector<EmbeddingSequence> embed_batch(const EmbeddingBackend& backend,
                                                  const std::vector<preprocess::TokenSequence>& sequences) {
    if (sequences.empty()) return {};
    const int len = sequences.front().length();
    for (std::size_t i = 1; i < sequences.size(); ++i) {
        if (sequences[i].length() != len) {
            throw_data("embed_batch: mixed sequence lengths (" + std::to_string(len) + " vs " +
                       std::to_string(sequences[i].length()) + " at index " + std::to_string(i) + ")");
        }
    }
    auto out = backend.run(sequences);
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& emb = out[i];
        if (emb.rows != len || emb.cols != backend.hidden_width()) {
            throw_runtime("embed_batch: backend returned unexpected shape for sequence " + std::to_string(i));
        }
        for (const float v : emb.values) {
            if (!std::isfinite(v)) {
                throw_runtime("embed_batch: non-finite embedding value in sequence " + std::to_string(i));
            }
        }
        emb.mask.assign(sequences[i].attention_mask.begin(), sequences[i].attention_mask.end());
    }
    return out;
}

namespace detail {

inline std::uint64_t cache_key(const std::string& backend_name, const preprocess::TokenSequence& seq) {
    std::uint64_t h = serialize::fnv1a64(backend_name.data(), backend_name.size());
    const std::uint32_t len = static_cast<std::uint32_t>(seq.ids.size());
    h = serialize::fnv1a64(&len, sizeof(len), h);
    for (int id : seq.ids) {
        const std::int32_t v = id;
        h = serialize::fnv1a64(&v, sizeof(v), h);
    }
    h = serialize::fnv1a64(seq.attention_mask.data(), seq.attention_mask.size(), h);
    return h;
}

// Cache entry layout: u32 L, u32 H, u32 name length, name bytes, then
// L*H row-major 32-bit floats.
inline std::string encode_cache_entry(const std::string& backend_name, const EmbeddingSequence& emb) {
    std::string buf;
    buf.reserve(16 + backend_name.size() + emb.values.size() * 4);
    serialize::put_u32(buf, static_cast<std::uint32_t>(emb.rows));
    serialize::put_u32(buf, static_cast<std::uint32_t>(emb.cols));
    serialize::put_string(buf, backend_name);
    for (float v : emb.values) serialize::put_f32(buf, v);
    return buf;
}

inline bool decode_cache_entry(const std::string& data, const std::string& backend_name,
                               int expect_rows, int expect_cols, EmbeddingSequence& out) {
    try {
        serialize::Reader r(data.data(), data.size(), "cache entry");
        const auto rows = static_cast<int>(r.get_u32());
        const auto cols = static_cast<int>(r.get_u32());
        const std::string name = r.get_string();
        if (rows != expect_rows || cols != expect_cols || name != backend_name) return false;
        const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
        if (r.remaining() != n * 4) return false;
        out.rows = rows;
        out.cols = cols;
        out.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.values[i] = r.get_f32();
        return true;
    } catch (const Error&) {
        return false;
    }
}

} // namespace detail

// embed_batch with an on-disk cache keyed by (backend name, token ids, mask).
// Hits skip the backend entirely; corrupt entries are discarded with a
// warning and recomputed. Writes go through atomic rename, so concurrent
// readers and a single writer per key are safe.
inline std::vector<EmbeddingSequence> cached_embed(const EmbeddingBackend& backend,
                                                   const std::filesystem::path& cache_dir,
                                                   const std::vector<preprocess::TokenSequence>& sequences,
                                                   std::size_t* backend_calls = nullptr) {
    namespace fs = std::filesystem;
    if (sequences.empty()) {
        if (backend_calls) *backend_calls = 0;
        return {};
    }
    const int len = sequences.front().length();
    for (std::size_t i = 1; i < sequences.size(); ++i) {
        if (sequences[i].length() != len) throw_data("cached_embed: mixed sequence lengths");
    }

    std::error_code ec;
    fs::create_directories(cache_dir, ec);

    const std::string bname = backend.name();
    std::vector<EmbeddingSequence> out(sequences.size());
    std::vector<std::size_t> misses;
    std::vector<fs::path> miss_paths;

    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto key = detail::cache_key(bname, sequences[i]);
        const fs::path entry = cache_dir / serialize::hex64(key);
        bool hit = false;
        if (fs::exists(entry, ec) && !ec) {
            std::string data;
            try {
                data = serialize::read_file(entry);
            } catch (const Error&) {
                data.clear();
            }
            if (!data.empty() && detail::decode_cache_entry(data, bname, len, backend.hidden_width(), out[i])) {
                out[i].mask.assign(sequences[i].attention_mask.begin(), sequences[i].attention_mask.end());
                hit = true;
            } else {
                std::cerr << "clickdet: warning: discarding corrupt cache entry " << entry.string() << "\n";
            }
        }
        if (!hit) {
            misses.push_back(i);
            miss_paths.push_back(entry);
        }
    }

    if (backend_calls) *backend_calls = misses.empty() ? 0 : 1;
    if (!misses.empty()) {
        std::vector<preprocess::TokenSequence> to_compute;
        to_compute.reserve(misses.size());
        for (auto i : misses) to_compute.push_back(sequences[i]);
        auto computed = embed_batch(backend, to_compute);
        for (std::size_t m = 0; m < misses.size(); ++m) {
            out[misses[m]] = std::move(computed[m]);
            try {
                fs::create_directories(cache_dir, ec);  // tolerate directory deletion mid-run
                serialize::write_file_atomic(miss_paths[m],
                                             detail::encode_cache_entry(bname, out[misses[m]]));
            } catch (const Error& e) {
                std::cerr << "clickdet: warning: could not write cache entry: " << e.what() << "\n";
            }
        }
    }
    return out;
}

} // namespace clickdet::embed
