#include "capgen/decode.hpp"

#include <algorithm>

#include "capgen/errors.hpp"

namespace capgen {

std::vector<std::string> greedy_decode(const MergeModel<float>& model, std::span<const float> feature,
                                       const Vocabulary& vocab, std::size_t max_len) {
    const ModelConfig& cfg = model.config();
    if (cfg.vocab_size != vocab.size()) throw VocabMismatch(cfg.vocab_size, vocab.size());
    if (feature.size() != cfg.feature_dim)
        throw DimMismatch("feature vector has " + std::to_string(feature.size()) + " components, model expects " +
                          std::to_string(cfg.feature_dim));

    TensorF features({1, feature.size()});
    std::copy(feature.begin(), feature.end(), features.values().begin());

    const std::int32_t start = vocab.start_index();
    const std::int32_t end = vocab.end_index();
    std::vector<std::int32_t> seq = {start};
    std::vector<std::string> words;

    while (seq.size() < max_len) {
        IndexTensor seqs({1, max_len});
        for (std::size_t j = 0; j < seq.size(); ++j) seqs.values()[max_len - seq.size() + j] = seq[j];

        TensorF probs = model.forward(features, seqs, nn::Mode::infer);
        const float* p = probs.row(0);
        const std::size_t vocab_size = probs.dim(1);

        // Argmax over real words; the padding slot and startseq are never
        // legal outputs.
        std::int32_t best = -1;
        float best_p = 0.0f;
        for (std::size_t j = 1; j < vocab_size; ++j) {
            if (static_cast<std::int32_t>(j) == start) continue;
            if (best < 0 || p[j] > best_p) {
                best = static_cast<std::int32_t>(j);
                best_p = p[j];
            }
        }
        if (best == end) break;
        words.push_back(vocab.word_at(best));
        seq.push_back(best);
    }
    return words;
}

}  // namespace capgen
