#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <unordered_set>

#include "clickdet/error.hpp"
#include "clickdet/text.hpp"

namespace clickdet::stopwords {

// Case-insensitive stopword membership. Entries are stored ASCII-lowered;
// the bundled Indonesian list is plain ASCII, so ASCII folding suffices.
class StopwordSet {
public:
    StopwordSet() = default;

    static StopwordSet from_words(std::initializer_list<std::string_view> words) {
        StopwordSet s;
        for (auto w : words) s.words_.insert(text::lower_ascii(w));
        return s;
    }

    // One word per line, UTF-8; blank lines and surrounding whitespace ignored.
    static StopwordSet load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw_data("cannot open stopword file: " + path.string());
        StopwordSet s;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
                line.pop_back();
            std::size_t start = 0;
            while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
            if (start > 0) line.erase(0, start);
            if (line.empty()) continue;
            s.words_.insert(text::lower_ascii(line));
        }
        return s;
    }

    bool contains(std::string_view word) const {
        if (words_.empty()) return false;
        return words_.count(text::lower_ascii(word)) > 0;
    }

    std::size_t size() const { return words_.size(); }
    bool empty() const { return words_.empty(); }

private:
    std::unordered_set<std::string> words_;
};

} // namespace clickdet::stopwords
