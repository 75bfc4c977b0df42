#include "capgen/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "capgen/checkpoint.hpp"
#include "capgen/errors.hpp"
#include "capgen/io.hpp"
#include "capgen/rng.hpp"

namespace capgen {

TrainReport train(MergeModel<float>& model, const CaptionSet& captions, const FeatureStore& features,
                  const Vocabulary& vocab, const TrainConfig& config) {
    if (config.epochs < 1) throw InvalidConfig("epochs must be >= 1");
    const ModelConfig& mcfg = model.config();
    if (mcfg.vocab_size != vocab.size()) throw VocabMismatch(mcfg.vocab_size, vocab.size());

    nn::Optimizer<float> optimizer(config.optimizer, model.parameters());
    TrainReport report;
    report.epochs = config.epochs;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        StreamConfig scfg;
        scfg.max_len = mcfg.max_len;
        scfg.images_per_batch = config.images_per_batch;
        scfg.epoch_seed = rng::mix(config.seed, epoch);
        scfg.shuffle = config.shuffle;
        BatchStream stream(captions, features, vocab, scfg);

        double loss_sum = 0.0;
        std::size_t sample_count = 0;
        std::size_t batch_index = 0;
        while (auto batch = stream.next()) {
            model.zero_grads();
            const std::uint64_t dropout_key = rng::mix(rng::mix(config.seed, epoch), batch_index);
            const double loss = model.loss_and_gradients(batch->features, batch->seqs, batch->targets, dropout_key);
            if (!std::isfinite(loss))
                throw NonFiniteLoss(static_cast<unsigned>(epoch), batch_index);
            optimizer.step();
            loss_sum += loss * static_cast<double>(batch->size());
            sample_count += batch->size();
            ++batch_index;
        }

        const double mean_loss = sample_count ? loss_sum / static_cast<double>(sample_count) : 0.0;
        report.epoch_losses.push_back(mean_loss);
        report.samples_per_epoch = sample_count;

        if (!config.checkpoint_dir.empty()) {
            const std::string bytes =
                save_checkpoint(model, vocab, static_cast<std::uint32_t>(epoch), static_cast<float>(mean_loss));
            io::write_file_atomic(config.checkpoint_dir / ("epoch_" + std::to_string(epoch) + ".ckpt"), bytes);
        }
        if (config.log) {
            char line[128];
            std::snprintf(line, sizeof line, "[epoch %zu/%zu] mean_loss=%.6f samples=%zu", epoch, config.epochs,
                          mean_loss, sample_count);
            *config.log << line << '\n';
        }
    }
    return report;
}

}  // namespace capgen
