#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "capgen/commands.hpp"
#include "capgen/errors.hpp"

namespace {

// CLI11 reports all parse problems with its own codes; fold them into the
// usage-error class (2) so scripts see one convention. --help stays 0.
int exit_code_for(const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return 0;
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"image captioning engine: prepare text, train, caption, evaluate"};
    app.require_subcommand(1);

    capgen::cmd::PrepareOptions prep;
    std::string prep_split;
    CLI::App* prepare = app.add_subcommand("prepare", "clean a token file into a descriptions file");
    prepare->add_option("--tokens", prep.tokens, "token file: <image>.<ext>#<k><TAB><caption>")->required();
    prepare->add_option("--split-ids", prep_split, "keep only image ids listed in this file");
    prepare->add_option("--out", prep.out, "descriptions file to write")->required();
    prepare->add_option("--min-count", prep.min_count, "vocabulary frequency threshold");

    capgen::cmd::SynthFeaturesOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth-features", "deterministic stand-in feature vectors");
    synth_cmd->add_option("--descriptions", synth.descriptions, "descriptions file naming the images")->required();
    synth_cmd->add_option("--out", synth.out, "feature store to write")->required();
    synth_cmd->add_option("--feature-dim", synth.feature_dim, "vector dimension");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");

    capgen::cmd::TrainOptions tr;
    CLI::App* train_cmd = app.add_subcommand("train", "train the merge model");
    train_cmd->add_option("--features", tr.features, "feature store")->required();
    train_cmd->add_option("--descriptions", tr.descriptions, "descriptions file")->required();
    train_cmd->add_option("--out", tr.out_dir, "output directory for checkpoints, loss.csv, manifest")->required();
    train_cmd->add_option("--epochs", tr.epochs, "training epochs");
    train_cmd->add_option("--images-per-batch", tr.images_per_batch, "images expanded per batch");
    train_cmd->add_option("--seed", tr.seed, "init/shuffle/dropout seed");
    train_cmd->add_option("--feature-dim", tr.feature_dim, "image feature dimension");
    train_cmd->add_option("--max-len", tr.max_len, "sequence length including sentinels");
    train_cmd->add_option("--embed-dim", tr.embed_dim, "word embedding dimension");
    train_cmd->add_option("--hidden-dim", tr.hidden_dim, "dense/LSTM width");
    train_cmd->add_option("--dropout", tr.dropout, "dropout rate in [0,1)");
    train_cmd->add_option("--min-count", tr.min_count, "vocabulary frequency threshold");
    train_cmd->add_option("--lr", tr.lr, "learning rate");
    train_cmd->add_option("--optimizer", tr.optimizer, "adam|sgd");
    train_cmd->add_flag("--no-shuffle", tr.no_shuffle, "keep image order fixed every epoch");

    capgen::cmd::EvaluateOptions ev;
    std::string ev_out, ev_bleu;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "greedy-decode a corpus and report BLEU");
    eval_cmd->add_option("checkpoint", ev.checkpoint, "trained checkpoint")->required();
    eval_cmd->add_option("--features", ev.features, "feature store")->required();
    eval_cmd->add_option("--descriptions", ev.descriptions, "reference captions")->required();
    eval_cmd->add_option("--out", ev_out, "also write per-image candidate/reference TSV here");
    eval_cmd->add_option("--smoothing", ev.smoothing, "none|floor");
    eval_cmd->add_option("--bleu", ev_bleu, "1|2|3|4|custom:w1,w2,w3,w4 (custom adds a report row)");

    capgen::cmd::BleuOptions bl;
    std::string bl_bleu;
    CLI::App* bleu_cmd = app.add_subcommand("bleu", "score a pre-decoded candidate/reference TSV");
    bleu_cmd->add_option("tsv", bl.tsv, "image_id<TAB>candidate<TAB>ref1[<TAB>ref2...]")->required();
    bleu_cmd->add_option("--smoothing", bl.smoothing, "none|floor");
    bleu_cmd->add_option("--bleu", bl_bleu, "1|2|3|4|custom:w1,w2,w3,w4 (custom adds a report row)");

    capgen::cmd::CaptionOptions cap;
    std::string cap_id;
    CLI::App* caption_cmd = app.add_subcommand("caption", "generate one caption");
    caption_cmd->add_option("checkpoint", cap.checkpoint, "trained checkpoint")->required();
    caption_cmd->add_option("id", cap_id, "image id inside the feature store (omit for a raw vector file)");
    caption_cmd->add_option("--features", cap.features, "feature store, or a whitespace-separated vector file")
        ->required();

    capgen::cmd::PlotLossOptions plot;
    CLI::App* plot_cmd = app.add_subcommand("plot-loss", "render loss.csv as an SVG curve");
    plot_cmd->add_option("csv", plot.csv, "loss CSV (epoch,mean_loss)")->required();
    plot_cmd->add_option("--out", plot.out, "SVG path to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help or the parse failure
        return exit_code_for(e);
    }

    try {
        if (*prepare) {
            if (!prep_split.empty()) prep.split_ids = prep_split;
            return capgen::cmd::run_prepare(prep, std::cout);
        }
        if (*synth_cmd) return capgen::cmd::run_synth_features(synth, std::cout);
        if (*train_cmd) return capgen::cmd::run_train(tr, std::cout);
        if (*eval_cmd) {
            if (!ev_out.empty()) ev.out_tsv = ev_out;
            if (!ev_bleu.empty()) ev.bleu = ev_bleu;
            return capgen::cmd::run_evaluate(ev, std::cout, std::cerr);
        }
        if (*bleu_cmd) {
            if (!bl_bleu.empty()) bl.bleu = bl_bleu;
            return capgen::cmd::run_bleu(bl, std::cout);
        }
        if (*caption_cmd) {
            if (!cap_id.empty()) cap.image_id = cap_id;
            return capgen::cmd::run_caption(cap, std::cout);
        }
        if (*plot_cmd) return capgen::cmd::run_plot_loss(plot, std::cout);
    } catch (const capgen::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
