#include "capgen/feature_store.hpp"

#include <cmath>
#include <limits>

#include "capgen/io.hpp"
#include "capgen/rng.hpp"

namespace capgen {

namespace {
constexpr std::string_view kMagic = "MFV1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void FeatureStore::insert(std::string id, std::vector<float> vec) {
    if (vec.size() != dim_)
        throw DimMismatch("feature vector for '" + id + "' has " + std::to_string(vec.size()) +
                          " components, store dim is " + std::to_string(dim_));
    for (float v : vec)
        if (!std::isfinite(v)) throw InvalidConfig("feature vector for '" + id + "' has a non-finite component");
    auto [it, inserted] = vectors_.emplace(std::move(id), std::move(vec));
    if (!inserted) throw DuplicateId(it->first);
}

std::span<const float> FeatureStore::require(const std::string& id) const {
    const std::vector<float>* vec = find(id);
    if (!vec) throw MissingFeature(id);
    return *vec;
}

std::string write_store(const FeatureStore& store) {
    std::string out;
    out += kMagic;
    io::put_u32le(out, kVersion);
    io::put_u32le(out, static_cast<std::uint32_t>(store.dim()));
    io::put_u32le(out, static_cast<std::uint32_t>(store.size()));
    for (const auto& [id, vec] : store.vectors()) {
        if (id.size() > std::numeric_limits<std::uint16_t>::max())
            throw IoError("image id too long for store format: '" + id.substr(0, 32) + "...'", 3);
        io::put_u16le(out, static_cast<std::uint16_t>(id.size()));
        out += id;
        for (float v : vec) io::put_f32le(out, v);
    }
    return out;
}

FeatureStore read_store(std::string_view bytes) {
    io::Reader r(bytes);
    std::string_view magic = r.get_bytes<TruncatedRecord>(4, "magic");
    if (magic != kMagic) throw BadMagic("feature store");
    std::uint32_t version = r.get_u32le<TruncatedRecord>("version");
    if (version != kVersion) throw BadVersion("feature store", version);
    std::uint32_t dim = r.get_u32le<TruncatedRecord>("dim");
    std::uint32_t count = r.get_u32le<TruncatedRecord>("count");
    if (dim == 0) throw DimMismatch("feature store header declares dim 0");

    FeatureStore store(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t id_len = r.get_u16le<TruncatedRecord>("record id length");
        std::string id(r.get_bytes<TruncatedRecord>(id_len, "record id"));
        r.need<TruncatedRecord>(std::size_t{4} * dim, "record components");
        std::vector<float> vec(dim);
        for (std::uint32_t j = 0; j < dim; ++j) vec[j] = r.get_f32le<TruncatedRecord>("component");
        store.insert(std::move(id), std::move(vec));
    }
    if (!r.at_end())
        throw TruncatedRecord("file has " + std::to_string(r.remaining()) +
                              " trailing bytes beyond the declared record count");
    return store;
}

FeatureStore synth_features(std::span<const std::string> image_ids, std::size_t dim, std::uint64_t seed) {
    FeatureStore store(dim);
    for (const auto& id : image_ids) {
        std::uint64_t base = rng::hash_bytes(rng::splitmix64(seed), id);
        std::vector<float> vec(dim);
        for (std::size_t i = 0; i < dim; ++i) vec[i] = rng::u01f(rng::splitmix64(base + rng::kGolden * (i + 1)));
        store.insert(id, std::move(vec));  // throws DuplicateId on repeats
    }
    return store;
}

}  // namespace capgen
