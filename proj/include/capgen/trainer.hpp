#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "capgen/dataloader.hpp"
#include "capgen/model.hpp"
#include "capgen/optimizer.hpp"

namespace capgen {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t images_per_batch = 1;
    std::uint64_t seed = 42;
    bool shuffle = true;
    nn::OptimizerConfig optimizer;
    std::filesystem::path checkpoint_dir;  // empty: keep everything in memory
    std::ostream* log = nullptr;           // per-epoch progress lines
};

struct TrainReport {
    std::vector<double> epoch_losses;  // mean cross-entropy, one per epoch
    std::size_t epochs = 0;
    std::size_t samples_per_epoch = 0;
};

// Runs the full training loop: one pass over the streamed samples per epoch,
// one optimizer step per batch, `epoch_<k>.ckpt` written after each epoch.
// Aborts with NonFiniteLoss (leaving earlier checkpoints intact) if the loss
// stops being a number.
TrainReport train(MergeModel<float>& model, const CaptionSet& captions, const FeatureStore& features,
                  const Vocabulary& vocab, const TrainConfig& config);

}  // namespace capgen
