#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capgen/feature_store.hpp"
#include "capgen/tensor.hpp"
#include "capgen/text_prep.hpp"

namespace capgen {

// One (prefix -> next word) training pair. input_seq is pre-padded: zeros on
// the left, the prefix right-aligned.
struct TrainSample {
    std::vector<float> feature;
    std::vector<std::int32_t> input_seq;  // length max_len
    std::int32_t target_index = 0;

    bool operator==(const TrainSample&) const = default;
};

struct Batch {
    TensorF features;       // (n, feature_dim)
    IndexTensor seqs;       // (n, max_len)
    std::vector<std::int32_t> targets;

    std::size_t size() const { return targets.size(); }
};

// Expands an encoded caption [w1..wL] into L-1 samples: sample k predicts
// token k+1 from the right-aligned prefix of the first k tokens.
std::vector<TrainSample> expand_caption(std::span<const std::int32_t> encoded_caption,
                                        std::span<const float> feature, std::size_t max_len,
                                        const std::string& image_id = "");

std::vector<float> one_hot(std::int32_t index, std::size_t size);

struct StreamConfig {
    std::size_t max_len = 34;
    std::size_t images_per_batch = 1;
    std::uint64_t epoch_seed = 0;
    bool shuffle = true;
};

// Generator over one epoch: walks images in a seed-determined permutation and
// yields the expanded samples of `images_per_batch` consecutive images per
// batch. Only the batch under construction is ever resident.
class BatchStream {
public:
    BatchStream(const CaptionSet& captions, const FeatureStore& features, const Vocabulary& vocab,
                StreamConfig config);

    std::optional<Batch> next();

    std::size_t total_samples() const { return total_samples_; }           // yielded so far
    std::size_t peak_resident_samples() const { return peak_resident_; }

private:
    const CaptionSet& captions_;
    const FeatureStore& features_;
    const Vocabulary& vocab_;
    StreamConfig cfg_;
    std::vector<const std::string*> order_;  // permuted image ids
    std::size_t cursor_ = 0;
    std::size_t total_samples_ = 0;
    std::size_t peak_resident_ = 0;
};

}  // namespace capgen
