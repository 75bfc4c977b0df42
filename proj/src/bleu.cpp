#include "capgen/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "capgen/errors.hpp"

namespace capgen::bleu {

NgramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
    if (n < 1) throw InvalidConfig("n-gram order must be >= 1");
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

PrecisionCounts modified_precision(std::span<const std::string> candidate,
                                   std::span<const std::vector<std::string>> references, std::size_t n) {
    const NgramCounts cand = ngrams(candidate, n);
    PrecisionCounts out;
    for (const auto& [gram, count] : cand) out.total += count;

    NgramCounts max_ref;
    for (const auto& ref : references)
        for (const auto& [gram, count] : ngrams(ref, n)) {
            auto& best = max_ref[gram];
            if (count > best) best = count;
        }
    for (const auto& [gram, count] : cand) {
        auto it = max_ref.find(gram);
        if (it != max_ref.end()) out.clipped += std::min(count, it->second);
    }
    return out;
}

double brevity_penalty(std::size_t c, std::size_t r) {
    if (c > r) return 1.0;
    return std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
}

void BleuConfig::validate() const {
    if (max_n < 1) throw InvalidConfig("bleu max_n must be >= 1");
    if (weights.size() != max_n)
        throw InvalidConfig("bleu weights: got " + std::to_string(weights.size()) + ", expected " +
                            std::to_string(max_n));
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidConfig("bleu weights must be non-negative");
        total += w;
    }
    if (total <= 0.0) throw InvalidConfig("at least one bleu weight must be positive");
    if (!(floor_epsilon > 0.0)) throw InvalidConfig("floor_epsilon must be positive");
}

BleuConfig preset(std::string_view name) {
    BleuConfig cfg;
    if (name == "bleu1")
        cfg.weights = {1.0, 0.0, 0.0, 0.0};
    else if (name == "bleu2")
        cfg.weights = {0.5, 0.5, 0.0, 0.0};
    else if (name == "bleu3")
        cfg.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0};
    else if (name == "bleu4")
        cfg.weights = {0.25, 0.25, 0.25, 0.25};
    else
        throw UnknownPreset(std::string(name));
    return cfg;
}

// Per-entry r contribution: the reference length closest to the candidate's,
// ties to the shorter.
static std::size_t closest_ref_length(std::size_t c, std::span<const std::vector<std::string>> references) {
    std::size_t best = references.front().size();
    for (const auto& ref : references.subspan(1)) {
        const std::size_t len = ref.size();
        const auto dist = [c](std::size_t l) {
            return l > c ? l - c : c - l;
        };
        if (dist(len) < dist(best) || (dist(len) == dist(best) && len < best)) best = len;
    }
    return best;
}

BleuReport bleu_score(const CandidateSet& candidates, const BleuConfig& config) {
    config.validate();
    if (candidates.empty()) throw EmptyCorpus();

    std::vector<std::size_t> clipped(config.max_n, 0), total(config.max_n, 0);
    std::size_t c = 0, r = 0;
    for (const auto& entry : candidates) {
        if (entry.references.empty()) throw EmptyCorpus();
        c += entry.candidate.size();
        r += closest_ref_length(entry.candidate.size(), entry.references);
        for (std::size_t n = 1; n <= config.max_n; ++n) {
            const PrecisionCounts pc = modified_precision(entry.candidate, entry.references, n);
            clipped[n - 1] += pc.clipped;
            total[n - 1] += pc.total;
        }
    }

    BleuReport report;
    report.candidate_length = c;
    report.reference_length = r;
    report.precisions.resize(config.max_n, 0.0);
    for (std::size_t n = 0; n < config.max_n; ++n)
        if (total[n] > 0) report.precisions[n] = static_cast<double>(clipped[n]) / static_cast<double>(total[n]);

    if (c == 0) return report;  // all candidates empty: score 0, no penalty defined
    report.brevity_penalty = brevity_penalty(c, r);

    double log_bleu = std::min(1.0 - static_cast<double>(r) / static_cast<double>(c), 0.0);
    for (std::size_t n = 0; n < config.max_n; ++n) {
        const double w = config.weights[n];
        if (w <= 0.0) continue;
        double p = report.precisions[n];
        if (p <= 0.0) {
            if (config.smoothing == Smoothing::none) return report;  // score stays 0
            p = config.floor_epsilon;
        }
        log_bleu += w * std::log(p);
    }
    report.score = 100.0 * std::exp(log_bleu);
    return report;
}

static std::vector<std::string> split_tokens(std::string_view field) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < field.size()) {
        while (i < field.size() && field[i] == ' ') ++i;
        std::size_t j = i;
        while (j < field.size() && field[j] != ' ') ++j;
        if (j > i) tokens.emplace_back(field.substr(i, j - i));
        i = j;
    }
    return tokens;
}

CandidateSet parse_candidate_tsv(std::string_view contents) {
    CandidateSet out;
    std::size_t line_no = 0, pos = 0;
    while (pos <= contents.size()) {
        if (pos == contents.size()) break;
        std::size_t eol = contents.find('\n', pos);
        if (eol == std::string_view::npos) eol = contents.size();
        std::string_view line = contents.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string_view::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() < 3)
            throw MalformedLine(line_no, "expected image_id<TAB>candidate<TAB>reference...");
        if (fields[0].empty()) throw MalformedLine(line_no, "empty image id");

        Entry entry;
        entry.image_id = std::string(fields[0]);
        entry.candidate = split_tokens(fields[1]);
        for (std::size_t f = 2; f < fields.size(); ++f) entry.references.push_back(split_tokens(fields[f]));
        out.push_back(std::move(entry));
    }
    return out;
}

static void append_tokens(std::string& out, std::span<const std::string> tokens) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
}

std::string write_candidate_tsv(const CandidateSet& candidates) {
    std::string out;
    for (const auto& entry : candidates) {
        out += entry.image_id;
        out.push_back('\t');
        append_tokens(out, entry.candidate);
        for (const auto& ref : entry.references) {
            out.push_back('\t');
            append_tokens(out, ref);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace capgen::bleu
