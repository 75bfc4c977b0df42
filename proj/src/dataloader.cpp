#include "capgen/dataloader.hpp"

#include "capgen/rng.hpp"

namespace capgen {

std::vector<TrainSample> expand_caption(std::span<const std::int32_t> encoded_caption,
                                        std::span<const float> feature, std::size_t max_len,
                                        const std::string& image_id) {
    const std::size_t len = encoded_caption.size();
    if (len < 2) throw CaptionTooShort(image_id);
    if (len > max_len) throw CaptionTooLong(image_id, len, max_len);

    std::vector<TrainSample> samples;
    samples.reserve(len - 1);
    for (std::size_t k = 1; k < len; ++k) {
        TrainSample s;
        s.feature.assign(feature.begin(), feature.end());
        s.input_seq.assign(max_len, 0);
        for (std::size_t j = 0; j < k; ++j) s.input_seq[max_len - k + j] = encoded_caption[j];
        s.target_index = encoded_caption[k];
        samples.push_back(std::move(s));
    }
    return samples;
}

std::vector<float> one_hot(std::int32_t index, std::size_t size) {
    if (index < 0 || static_cast<std::size_t>(index) >= size)
        throw IndexOutOfRange("one_hot index " + std::to_string(index) + " outside size " + std::to_string(size));
    std::vector<float> v(size, 0.0f);
    v[static_cast<std::size_t>(index)] = 1.0f;
    return v;
}

BatchStream::BatchStream(const CaptionSet& captions, const FeatureStore& features, const Vocabulary& vocab,
                         StreamConfig config)
    : captions_(captions), features_(features), vocab_(vocab), cfg_(config) {
    if (cfg_.images_per_batch < 1) throw InvalidConfig("images_per_batch must be >= 1");
    order_.reserve(captions_.entries.size());
    for (const auto& [id, caps] : captions_.entries) {
        if (!features_.find(id)) throw MissingFeature(id);
        order_.push_back(&id);
    }
    if (cfg_.shuffle) {
        rng::Stream stream(rng::mix(cfg_.epoch_seed, 0x5eedu));
        rng::shuffle(order_, stream);
    }
}

std::optional<Batch> BatchStream::next() {
    if (cursor_ >= order_.size()) return std::nullopt;

    std::vector<TrainSample> samples;
    const std::size_t end = std::min(cursor_ + cfg_.images_per_batch, order_.size());
    for (; cursor_ < end; ++cursor_) {
        const std::string& id = *order_[cursor_];
        std::span<const float> feature = features_.require(id);
        for (const auto& caption : captions_.entries.at(id)) {
            std::vector<std::int32_t> encoded = vocab_.encode(caption);
            for (auto& s : expand_caption(encoded, feature, cfg_.max_len, id)) samples.push_back(std::move(s));
        }
    }
    if (samples.empty()) return next();  // every caption of the window was dropped upstream

    if (samples.size() > peak_resident_) peak_resident_ = samples.size();
    total_samples_ += samples.size();

    const std::size_t n = samples.size();
    Batch batch;
    batch.features = TensorF({n, features_.dim()});
    batch.seqs = IndexTensor({n, cfg_.max_len});
    batch.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TrainSample& s = samples[i];
        float* frow = batch.features.row(i);
        for (std::size_t j = 0; j < s.feature.size(); ++j) frow[j] = s.feature[j];
        std::int32_t* srow = batch.seqs.row(i);
        for (std::size_t j = 0; j < cfg_.max_len; ++j) srow[j] = s.input_seq[j];
        batch.targets[i] = s.target_index;
    }
    return batch;
}

}  // namespace capgen
