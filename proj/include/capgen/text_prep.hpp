#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capgen/errors.hpp"

namespace capgen {

// One line of an <image>#<k><TAB><caption> token file, split but not yet cleaned.
struct RawCaptionRecord {
    std::string image_id;  // file stem, extension stripped
    int caption_index = 0;
    std::string text;

    bool operator==(const RawCaptionRecord&) const = default;
};

// image_id -> captions in caption_index order; each caption is a cleaned
// token list wrapped as [startseq, ..., endseq].
struct CaptionSet {
    std::map<std::string, std::vector<std::vector<std::string>>> entries;

    bool operator==(const CaptionSet&) const = default;
    bool empty() const { return entries.empty(); }

    std::size_t total_captions() const {
        std::size_t n = 0;
        for (const auto& [id, caps] : entries) n += caps.size();
        return n;
    }

    // Longest caption including the two sentinels.
    std::size_t max_caption_length() const {
        std::size_t n = 0;
        for (const auto& [id, caps] : entries)
            for (const auto& c : caps)
                if (c.size() > n) n = c.size();
        return n;
    }
};

// Bidirectional word<->index map. Index 0 is the reserved padding slot and
// never maps to a word; real words occupy 1..size()-1.
class Vocabulary {
public:
    static constexpr std::string_view kStartToken = "startseq";
    static constexpr std::string_view kEndToken = "endseq";

    Vocabulary() = default;

    // `words` listed in index order: words[i] gets index i+1. Must contain
    // both sentinels and no duplicates.
    static Vocabulary from_words(std::vector<std::string> words);

    std::size_t size() const { return words_.size() + 1; }  // +1 for the padding slot
    std::size_t word_count() const { return words_.size(); }

    std::optional<std::int32_t> find(std::string_view word) const;
    const std::string& word_at(std::int32_t index) const;

    std::int32_t start_index() const { return start_index_; }
    std::int32_t end_index() const { return end_index_; }

    // Word -> index for every known token; unknown tokens are dropped.
    std::vector<std::int32_t> encode(std::span<const std::string> tokens) const;

    const std::vector<std::string>& words() const { return words_; }

    bool operator==(const Vocabulary& other) const { return words_ == other.words_; }

private:
    std::vector<std::string> words_;  // words_[i] <-> index i+1
    std::unordered_map<std::string, std::int32_t> word_to_index_;
    std::int32_t start_index_ = 0;
    std::int32_t end_index_ = 0;
};

// Parses `<image_name>.<ext>#<k><TAB><caption>` lines. Blank lines are
// skipped; anything else malformed aborts with its 1-based line number.
std::vector<RawCaptionRecord> parse_token_file(std::string_view raw_text);

// Cleaning rules, applied per whitespace-separated word in this order:
//   R1 lowercase (ASCII), R2 strip a trailing "'s", R3 remove remaining
//   ASCII punctuation, R4 drop words containing a digit, R5 drop words of
//   length <= 1.
std::vector<std::string> clean_caption(std::string_view text);

// Groups cleaned captions by image id (caption_index order) and wraps each
// with the sentinels. Captions that clean to nothing are dropped;
// *dropped_count reports how many.
CaptionSet build_caption_set(const std::vector<RawCaptionRecord>& records, std::size_t* dropped_count = nullptr);

// Indices 1,2,3,... over tokens of corpus frequency >= min_count, assigned in
// lexicographic order. Sentinels are always included.
Vocabulary build_vocabulary(const CaptionSet& captions, std::size_t min_count);

// Descriptions file: one line per caption, `<image_id> <token> ...`.
std::string write_descriptions_file(const CaptionSet& captions);
CaptionSet read_descriptions_file(std::string_view contents);

}  // namespace capgen
