#include "capgen/text_prep.hpp"

#include <algorithm>
#include <map>

namespace capgen {
namespace {

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ascii_punct(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ascii_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_ascii_space(s[i])) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

}  // namespace

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
    Vocabulary v;
    v.words_ = std::move(words);
    v.word_to_index_.reserve(v.words_.size());
    for (std::size_t i = 0; i < v.words_.size(); ++i) {
        const std::string& w = v.words_[i];
        if (w.empty()) throw InvalidConfig("vocabulary contains an empty word");
        auto [it, inserted] = v.word_to_index_.emplace(w, static_cast<std::int32_t>(i + 1));
        if (!inserted) throw InvalidConfig("vocabulary contains duplicate word '" + w + "'");
    }
    auto start = v.find(kStartToken);
    auto end = v.find(kEndToken);
    if (!start || !end) throw InvalidConfig("vocabulary is missing a sentinel token");
    v.start_index_ = *start;
    v.end_index_ = *end;
    return v;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view word) const {
    auto it = word_to_index_.find(std::string(word));
    if (it == word_to_index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::word_at(std::int32_t index) const {
    if (index < 1 || static_cast<std::size_t>(index) >= size())
        throw IndexOutOfRange("vocabulary index " + std::to_string(index) + " outside 1.." +
                              std::to_string(size() - 1));
    return words_[static_cast<std::size_t>(index) - 1];
}

std::vector<std::int32_t> Vocabulary::encode(std::span<const std::string> tokens) const {
    std::vector<std::int32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (auto idx = find(t)) out.push_back(*idx);
    return out;
}

std::vector<RawCaptionRecord> parse_token_file(std::string_view raw_text) {
    std::vector<RawCaptionRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= raw_text.size()) {
        std::size_t eol = raw_text.find('\n', pos);
        std::string_view line =
            raw_text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? raw_text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) throw MalformedLine(line_no, "missing TAB separator");
        std::string_view head = line.substr(0, tab);
        std::string_view text = line.substr(tab + 1);

        std::size_t hash = head.rfind('#');
        if (hash == std::string_view::npos) throw MalformedLine(line_no, "missing '#' caption index");
        std::string_view name = head.substr(0, hash);
        std::string_view index_str = head.substr(hash + 1);
        if (index_str.empty() || !std::all_of(index_str.begin(), index_str.end(), is_ascii_digit))
            throw MalformedLine(line_no, "caption index is not a non-negative integer");

        std::size_t dot = name.rfind('.');
        std::string_view stem = (dot == std::string_view::npos || dot == 0) ? name : name.substr(0, dot);
        if (stem.empty()) throw MalformedLine(line_no, "empty image id");
        if (text.find_first_not_of(" \t") == std::string_view::npos)
            throw MalformedLine(line_no, "empty caption text");

        RawCaptionRecord rec;
        rec.image_id = std::string(stem);
        rec.caption_index = std::stoi(std::string(index_str));
        rec.text = std::string(text);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::string> clean_caption(std::string_view text) {
    std::vector<std::string> out;
    for (std::string_view raw : split_ws(text)) {
        std::string w;
        w.reserve(raw.size());
        for (char c : raw) w.push_back(ascii_lower(c));
        if (w.size() >= 2 && w[w.size() - 2] == '\'' && w[w.size() - 1] == 's') w.erase(w.size() - 2);
        std::string t;
        t.reserve(w.size());
        bool has_digit = false;
        for (char c : w) {
            if (is_ascii_punct(c)) continue;
            if (is_ascii_digit(c)) has_digit = true;
            t.push_back(c);
        }
        if (has_digit || t.size() <= 1) continue;
        out.push_back(std::move(t));
    }
    return out;
}

CaptionSet build_caption_set(const std::vector<RawCaptionRecord>& records, std::size_t* dropped_count) {
    std::map<std::string, std::vector<std::pair<int, std::vector<std::string>>>> grouped;
    std::size_t dropped = 0;
    for (const auto& rec : records) {
        std::vector<std::string> tokens = clean_caption(rec.text);
        if (tokens.empty()) {
            ++dropped;
            continue;
        }
        std::vector<std::string> wrapped;
        wrapped.reserve(tokens.size() + 2);
        wrapped.emplace_back(Vocabulary::kStartToken);
        for (auto& t : tokens) wrapped.push_back(std::move(t));
        wrapped.emplace_back(Vocabulary::kEndToken);
        grouped[rec.image_id].emplace_back(rec.caption_index, std::move(wrapped));
    }
    CaptionSet set;
    for (auto& [id, caps] : grouped) {
        std::stable_sort(caps.begin(), caps.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& dst = set.entries[id];
        dst.reserve(caps.size());
        for (auto& [idx, tokens] : caps) dst.push_back(std::move(tokens));
    }
    if (dropped_count) *dropped_count = dropped;
    return set;
}

Vocabulary build_vocabulary(const CaptionSet& captions, std::size_t min_count) {
    if (min_count < 1) throw InvalidConfig("min_count must be >= 1");
    std::map<std::string, std::size_t> freq;  // ordered: gives the lexicographic index assignment
    for (const auto& [id, caps] : captions.entries)
        for (const auto& cap : caps)
            for (const auto& tok : cap) ++freq[tok];
    freq[std::string(Vocabulary::kStartToken)] += min_count;  // sentinels survive any threshold
    freq[std::string(Vocabulary::kEndToken)] += min_count;

    std::vector<std::string> words;
    words.reserve(freq.size());
    for (const auto& [word, count] : freq)
        if (count >= min_count) words.push_back(word);
    return Vocabulary::from_words(std::move(words));
}

std::string write_descriptions_file(const CaptionSet& captions) {
    std::string out;
    for (const auto& [id, caps] : captions.entries) {
        for (const auto& cap : caps) {
            out += id;
            for (const auto& tok : cap) {
                out += ' ';
                out += tok;
            }
            out += '\n';
        }
    }
    return out;
}

CaptionSet read_descriptions_file(std::string_view contents) {
    CaptionSet set;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= contents.size()) {
        std::size_t eol = contents.find('\n', pos);
        std::string_view line =
            contents.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? contents.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        std::vector<std::string_view> fields = split_ws(line);
        if (fields.size() < 3) throw MalformedLine(line_no, "expected image id plus at least 2 tokens");
        if (fields[1] != Vocabulary::kStartToken || fields.back() != Vocabulary::kEndToken)
            throw MalformedLine(line_no, "caption is not wrapped with sentinel tokens");
        std::vector<std::string> tokens(fields.begin() + 1, fields.end());
        set.entries[std::string(fields[0])].push_back(std::move(tokens));
    }
    return set;
}

}  // namespace capgen
