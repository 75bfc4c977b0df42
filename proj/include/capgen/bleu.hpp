#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capgen::bleu {

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

// Contiguous n-grams with multiplicity; empty when the list is shorter than n.
NgramCounts ngrams(std::span<const std::string> tokens, std::size_t n);

struct PrecisionCounts {
    std::size_t clipped = 0;  // candidate n-gram matches, clipped per reference maximum
    std::size_t total = 0;    // candidate n-gram count

    bool operator==(const PrecisionCounts&) const = default;
};

// Modified n-gram precision as a (numerator, denominator) pair so corpus
// aggregation can sum both sides before dividing.
PrecisionCounts modified_precision(std::span<const std::string> candidate,
                                   std::span<const std::vector<std::string>> references, std::size_t n);

// 1 when the candidate is longer than the reference, e^(1−r/c) otherwise.
double brevity_penalty(std::size_t c, std::size_t r);

enum class Smoothing { none, floor };

struct BleuConfig {
    std::size_t max_n = 4;
    std::vector<double> weights;  // w_1..w_max_n
    Smoothing smoothing = Smoothing::none;
    double floor_epsilon = 1e-9;

    void validate() const;
};

// weights: bleu1 (1,0,0,0) · bleu2 (.5,.5,0,0) · bleu3 (1/3,1/3,1/3,0) ·
// bleu4 (.25,.25,.25,.25). Anything else: UnknownPreset.
BleuConfig preset(std::string_view name);

struct Entry {
    std::string image_id;
    std::vector<std::string> candidate;
    std::vector<std::vector<std::string>> references;  // at least one
};

using CandidateSet = std::vector<Entry>;

struct BleuReport {
    double score = 0.0;  // 0..100
    std::vector<double> precisions;  // unsmoothed p_1..p_max_n
    double brevity_penalty = 0.0;
    std::size_t candidate_length = 0;  // c
    std::size_t reference_length = 0;  // r, closest-reference convention
};

// Corpus-level BLEU: per-n numerators and denominators summed over all
// entries before dividing; combined in log space as
// min(1−r/c, 0) + Σ w_n·log p_n, exponentiated, and scaled to 0..100. A zero
// p_n with positive weight yields score 0 (smoothing none) or has p_n
// replaced by floor_epsilon (smoothing floor).
BleuReport bleu_score(const CandidateSet& candidates, const BleuConfig& config);

// One scored line per image: `image_id<TAB>candidate<TAB>ref1<TAB>ref2…`,
// token lists separated by spaces inside each field.
CandidateSet parse_candidate_tsv(std::string_view contents);
std::string write_candidate_tsv(const CandidateSet& candidates);

}  // namespace capgen::bleu
