#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "capgen/lstm.hpp"
#include "capgen/nn.hpp"
#include "capgen/rng.hpp"
#include "capgen/tensor.hpp"

namespace capgen {

struct ModelConfig {
    std::size_t feature_dim = 4096;
    std::size_t max_len = 34;
    std::size_t embed_dim = 256;
    std::size_t hidden_dim = 256;
    std::size_t vocab_size = 0;
    double dropout_rate = 0.5;

    void validate() const {
        if (feature_dim < 1 || max_len < 1 || embed_dim < 1 || hidden_dim < 1)
            throw InvalidConfig("all model dimensions must be >= 1");
        if (vocab_size < 3) throw InvalidConfig("vocab_size must be >= 3 (padding plus two sentinels)");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidConfig("dropout_rate must be in [0,1)");
    }

    bool operator==(const ModelConfig&) const = default;
};

// Two-branch captioning network. The image branch is dropout -> dense(relu);
// the text branch is embedding -> dropout -> LSTM; branch outputs merge by
// addition into dense(relu) -> dense(softmax) over the vocabulary.
template <typename T>
class MergeModel {
public:
    // Shapes all parameters, values zero.
    explicit MergeModel(const ModelConfig& config) : cfg_(config) {
        cfg_.validate();
        dense_img_.reset("dense_img", cfg_.hidden_dim, cfg_.feature_dim, nn::Activation::relu);
        embedding_.reset("embedding.E", cfg_.vocab_size, cfg_.embed_dim);
        lstm_.reset("lstm", cfg_.hidden_dim, cfg_.embed_dim);
        dense_dec_.reset("dense_dec", cfg_.hidden_dim, cfg_.hidden_dim, nn::Activation::relu);
        dense_out_.reset("dense_out", cfg_.vocab_size, cfg_.hidden_dim, nn::Activation::softmax);
        drop_img_.rate = cfg_.dropout_rate;
        drop_txt_.rate = cfg_.dropout_rate;
    }

    // Deterministic Glorot-uniform init; biases zero except the forget gate,
    // which starts at 1.
    static MergeModel init_random(const ModelConfig& config, std::uint64_t seed) {
        MergeModel m(config);
        auto glorot = [&](Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, std::uint64_t ordinal) {
            rng::Stream stream(rng::mix(seed, ordinal));
            nn::glorot_uniform(w, fan_in, fan_out, stream);
        };
        glorot(m.dense_img_.W.value, config.feature_dim, config.hidden_dim, 0);
        glorot(m.embedding_.table.value, config.vocab_size, config.embed_dim, 1);
        const std::size_t lstm_in = config.hidden_dim + config.embed_dim;
        glorot(m.lstm_.w_f.value, lstm_in, config.hidden_dim, 2);
        glorot(m.lstm_.w_i.value, lstm_in, config.hidden_dim, 3);
        glorot(m.lstm_.w_o.value, lstm_in, config.hidden_dim, 4);
        glorot(m.lstm_.w_c.value, lstm_in, config.hidden_dim, 5);
        glorot(m.dense_dec_.W.value, config.hidden_dim, config.hidden_dim, 6);
        glorot(m.dense_out_.W.value, config.hidden_dim, config.vocab_size, 7);
        for (auto& v : m.lstm_.b_f.value.values()) v = T(1);
        return m;
    }

    const ModelConfig& config() const { return cfg_; }

    std::vector<nn::Parameter<T>*> parameters() {
        return {&dense_img_.W, &dense_img_.b, &embedding_.table, &lstm_.w_f, &lstm_.b_f,
                &lstm_.w_i,    &lstm_.b_i,    &lstm_.w_o,        &lstm_.b_o, &lstm_.w_c,
                &lstm_.b_c,    &dense_dec_.W, &dense_dec_.b,     &dense_out_.W, &dense_out_.b};
    }

    std::vector<const nn::Parameter<T>*> parameters() const {
        auto list = const_cast<MergeModel*>(this)->parameters();
        return {list.begin(), list.end()};
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto* p : parameters()) n += p->value.size();
        return n;
    }

    void zero_grads() {
        for (auto* p : parameters()) p->zero_grad();
    }

    // features: (B, feature_dim), seqs: (B, max_len) -> probs (B, vocab_size).
    Tensor<T> forward(const Tensor<T>& features, const IndexTensor& seqs, nn::Mode mode,
                      std::uint64_t dropout_key = 0) const {
        return forward_impl(features, seqs, mode, dropout_key, nullptr);
    }

    // One fused training evaluation: forward in train mode, mean
    // cross-entropy, and full backward accumulation into parameter grads.
    double loss_and_gradients(const Tensor<T>& features, const IndexTensor& seqs,
                              std::span<const std::int32_t> targets, std::uint64_t dropout_key) {
        ForwardCache cache;
        Tensor<T> probs = forward_impl(features, seqs, nn::Mode::train, dropout_key, &cache);
        const double loss = nn::cross_entropy(probs, targets);

        Tensor<T> dlogits = nn::softmax_xent_grad(probs, targets);
        Tensor<T> ddec = dense_out_.backward_preact(cache.out_cache, dlogits);
        Tensor<T> dmerged = dense_dec_.backward(cache.dec_cache, ddec);
        dense_img_.backward(cache.img_cache, dmerged, /*need_dx=*/false);
        Tensor<T> demb_dropped = lstm_.sequence_backward(cache.lstm_cache, dmerged);
        Tensor<T> demb = nn::Dropout<T>::backward(cache.mask_txt, demb_dropped);
        embedding_.backward(seqs, demb);
        return loss;
    }

    const nn::Dense<T>& output_layer() const { return dense_out_; }
    nn::Dense<T>& output_layer() { return dense_out_; }
    const nn::LstmCell<T>& lstm() const { return lstm_; }

private:
    struct ForwardCache {
        typename nn::Dense<T>::Cache img_cache, dec_cache, out_cache;
        typename nn::LstmCell<T>::SeqCache lstm_cache;
        Tensor<T> mask_img, mask_txt;
    };

    Tensor<T> forward_impl(const Tensor<T>& features, const IndexTensor& seqs, nn::Mode mode,
                           std::uint64_t dropout_key, ForwardCache* cache) const {
        require_ndim(features, 2, "model features");
        require_ndim(seqs, 2, "model sequences");
        if (features.dim(1) != cfg_.feature_dim)
            throw ShapeMismatch("features dim " + std::to_string(features.dim(1)) + " != feature_dim " +
                                std::to_string(cfg_.feature_dim));
        if (seqs.dim(1) != cfg_.max_len)
            throw ShapeMismatch("sequence length " + std::to_string(seqs.dim(1)) + " != max_len " +
                                std::to_string(cfg_.max_len));
        if (features.dim(0) != seqs.dim(0))
            throw ShapeMismatch("batch mismatch: " + std::to_string(features.dim(0)) + " feature rows vs " +
                                std::to_string(seqs.dim(0)) + " sequences");

        Tensor<T> mask_img, mask_txt;
        Tensor<T> img_dropped =
            drop_img_.forward(features, mode, rng::mix(dropout_key, 1), cache ? &mask_img : nullptr);
        Tensor<T> img_h = dense_img_.forward(img_dropped, cache ? &cache->img_cache : nullptr);

        Tensor<T> emb = embedding_.forward(seqs);
        Tensor<T> emb_dropped = drop_txt_.forward(emb, mode, rng::mix(dropout_key, 2), cache ? &mask_txt : nullptr);
        Tensor<T> text_h = lstm_.sequence_forward(emb_dropped, cache ? &cache->lstm_cache : nullptr);

        Tensor<T> merged = nn::add_merge(img_h, text_h);
        Tensor<T> dec = dense_dec_.forward(merged, cache ? &cache->dec_cache : nullptr);
        Tensor<T> probs = dense_out_.forward(dec, cache ? &cache->out_cache : nullptr);
        if (cache) {
            cache->mask_img = std::move(mask_img);
            cache->mask_txt = std::move(mask_txt);
        }
        return probs;
    }

    ModelConfig cfg_;
    nn::Dropout<T> drop_img_, drop_txt_;
    nn::Dense<T> dense_img_;
    nn::Embedding<T> embedding_;
    nn::LstmCell<T> lstm_;
    nn::Dense<T> dense_dec_, dense_out_;
};

using MergeModelF = MergeModel<float>;
using MergeModelD = MergeModel<double>;

}  // namespace capgen
