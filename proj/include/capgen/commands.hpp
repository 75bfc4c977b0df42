#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace capgen::cmd {

struct PrepareOptions {
    std::filesystem::path tokens;
    std::filesystem::path out;
    std::optional<std::filesystem::path> split_ids;
    std::size_t min_count = 1;
};

struct SynthFeaturesOptions {
    std::filesystem::path descriptions;
    std::filesystem::path out;
    std::size_t feature_dim = 4096;
    std::uint64_t seed = 42;
};

struct TrainOptions {
    std::filesystem::path features;
    std::filesystem::path descriptions;
    std::filesystem::path out_dir;
    std::size_t epochs = 20;
    std::size_t images_per_batch = 1;
    std::uint64_t seed = 42;
    std::size_t feature_dim = 4096;
    std::size_t max_len = 34;
    std::size_t embed_dim = 256;
    std::size_t hidden_dim = 256;
    double dropout = 0.5;
    std::size_t min_count = 1;
    double lr = 1e-3;
    std::string optimizer = "adam";
    bool no_shuffle = false;
};

struct EvaluateOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path features;
    std::filesystem::path descriptions;
    std::optional<std::filesystem::path> out_tsv;
    std::string smoothing = "none";
    std::optional<std::string> bleu;  // custom:w1,w2,w3,w4 adds a fifth row
};

struct BleuOptions {
    std::filesystem::path tsv;
    std::string smoothing = "none";
    std::optional<std::string> bleu;
};

struct CaptionOptions {
    std::filesystem::path checkpoint;
    std::filesystem::path features;              // store, or raw vector file when no id given
    std::optional<std::string> image_id;
};

struct PlotLossOptions {
    std::filesystem::path csv;
    std::filesystem::path out;
};

// Each command returns a process exit code (0 on success) or throws a
// capgen::Error carrying one.
int run_prepare(const PrepareOptions& opt, std::ostream& out);
int run_synth_features(const SynthFeaturesOptions& opt, std::ostream& out);
int run_train(const TrainOptions& opt, std::ostream& out);
int run_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err);
int run_bleu(const BleuOptions& opt, std::ostream& out);
int run_caption(const CaptionOptions& opt, std::ostream& out);
int run_plot_loss(const PlotLossOptions& opt, std::ostream& out);

}  // namespace capgen::cmd
