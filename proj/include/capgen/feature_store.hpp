#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capgen/errors.hpp"

namespace capgen {

// Per-image feature vectors, all of one fixed dimension. Immutable once
// loaded; safe to share across threads for reads.
class FeatureStore {
public:
    explicit FeatureStore(std::size_t dim) : dim_(dim) {
        if (dim == 0) throw InvalidConfig("feature dimension must be >= 1");
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return vectors_.size(); }
    bool empty() const { return vectors_.empty(); }

    void insert(std::string id, std::vector<float> vec);

    const std::vector<float>* find(const std::string& id) const {
        auto it = vectors_.find(id);
        return it == vectors_.end() ? nullptr : &it->second;
    }

    // Throws MissingFeature when absent.
    std::span<const float> require(const std::string& id) const;

    const std::map<std::string, std::vector<float>>& vectors() const { return vectors_; }

    bool operator==(const FeatureStore&) const = default;

private:
    std::size_t dim_;
    std::map<std::string, std::vector<float>> vectors_;
};

// Binary layout: `MFV1` magic, then u32-LE version (=1), dim, count, and per
// record a u16-LE id length, the id bytes, and dim f32-LE components.
std::string write_store(const FeatureStore& store);
FeatureStore read_store(std::string_view bytes);

// Deterministic pseudo-features: each component is a pure function of
// (seed, image_id, component index), uniform in [0, 1), bit-identical across
// platforms and independent of id list order.
FeatureStore synth_features(std::span<const std::string> image_ids, std::size_t dim, std::uint64_t seed);

}  // namespace capgen
