#include "capgen/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "capgen/bleu.hpp"
#include "capgen/checkpoint.hpp"
#include "capgen/decode.hpp"
#include "capgen/errors.hpp"
#include "capgen/feature_store.hpp"
#include "capgen/io.hpp"
#include "capgen/loss_chart.hpp"
#include "capgen/text_prep.hpp"
#include "capgen/trainer.hpp"

namespace capgen::cmd {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

// Same stem rule as the token-file parser: drop a trailing .ext when the dot
// isn't the first character.
std::string strip_extension(std::string_view name) {
    const std::size_t dot = name.rfind('.');
    if (dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
    return std::string(name);
}

std::unordered_set<std::string> read_id_set(const std::filesystem::path& path) {
    const std::string raw = io::read_file(path);
    std::unordered_set<std::string> ids;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        std::size_t eol = raw.find('\n', pos);
        if (eol == std::string::npos) eol = raw.size();
        std::string_view line(raw.data() + pos, eol - pos);
        pos = eol + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (!line.empty()) ids.insert(strip_extension(line));
    }
    return ids;
}

bleu::Smoothing parse_smoothing(const std::string& name) {
    if (name == "none") return bleu::Smoothing::none;
    if (name == "floor") return bleu::Smoothing::floor;
    throw InvalidConfig("--smoothing must be 'none' or 'floor', got '" + name + "'");
}

// `--bleu custom:w1,w2,w3,w4` yields a config; the numeric selectors name
// presets that the report prints anyway.
std::optional<bleu::BleuConfig> parse_custom_bleu(const std::optional<std::string>& selector) {
    if (!selector) return std::nullopt;
    const std::string& s = *selector;
    if (s == "1" || s == "2" || s == "3" || s == "4") {
        bleu::preset("bleu" + s);  // validates the name
        return std::nullopt;
    }
    if (s.rfind("custom:", 0) != 0) throw UnknownPreset(s);
    bleu::BleuConfig cfg;
    cfg.weights.clear();
    std::string rest = s.substr(7);
    std::size_t start = 0;
    while (start <= rest.size()) {
        std::size_t comma = rest.find(',', start);
        const std::string field = rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        char* end = nullptr;
        const double w = std::strtod(field.c_str(), &end);
        if (field.empty() || end != field.c_str() + field.size())
            throw InvalidConfig("--bleu custom: bad weight '" + field + "'");
        cfg.weights.push_back(w);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (cfg.weights.size() != 4) throw InvalidConfig("--bleu custom: expected exactly 4 weights");
    cfg.validate();
    return cfg;
}

void print_bleu_analysis(std::ostream& out, const bleu::CandidateSet& set, bleu::Smoothing smoothing,
                         const std::optional<bleu::BleuConfig>& custom) {
    struct Row {
        std::string label;
        bleu::BleuConfig cfg;
        bleu::BleuReport rep;
    };
    std::vector<Row> rows;
    for (int k = 1; k <= 4; ++k) {
        bleu::BleuConfig cfg = bleu::preset("bleu" + std::to_string(k));
        cfg.smoothing = smoothing;
        rows.push_back({"BLEU-" + std::to_string(k), cfg, bleu::bleu_score(set, cfg)});
    }
    if (custom) {
        bleu::BleuConfig cfg = *custom;
        cfg.smoothing = smoothing;
        rows.push_back({"BLEU-custom", cfg, bleu::bleu_score(set, cfg)});
    }

    out << "N-GRAM\tWEIGHTS\tSCORE\n";
    for (const Row& row : rows) {
        std::string weights;
        for (std::size_t i = 0; i < row.cfg.weights.size(); ++i) {
            if (i) weights += ", ";
            weights += fmt("%.2f", row.cfg.weights[i]);
        }
        out << row.label << '\t' << weights << '\t' << fmt("%.4f", row.rep.score) << '\n';
    }
    out << '\n';
    for (const Row& row : rows) {
        out << row.label << "\tBP=" << fmt("%.6f", row.rep.brevity_penalty) << " c=" << row.rep.candidate_length
            << " r=" << row.rep.reference_length;
        for (std::size_t n = 0; n < row.rep.precisions.size(); ++n)
            out << " p" << n + 1 << "=" << fmt("%.6f", row.rep.precisions[n]);
        out << '\n';
    }
}

}  // namespace

int run_prepare(const PrepareOptions& opt, std::ostream& out) {
    const std::string raw = io::read_file(opt.tokens);
    std::vector<RawCaptionRecord> records = parse_token_file(raw);
    if (opt.split_ids) {
        const auto keep = read_id_set(*opt.split_ids);
        std::erase_if(records, [&](const RawCaptionRecord& r) { return !keep.contains(r.image_id); });
    }
    std::size_t dropped = 0;
    const CaptionSet captions = build_caption_set(records, &dropped);
    const Vocabulary vocab = build_vocabulary(captions, opt.min_count);
    io::write_file_atomic(opt.out, write_descriptions_file(captions));

    out << "captions: " << captions.total_captions() << '\n';
    out << "dropped empty captions: " << dropped << '\n';
    out << "vocabulary size: " << vocab.size() << '\n';
    out << "max caption length: " << captions.max_caption_length() << " (recommended --max-len)" << '\n';
    return 0;
}

int run_synth_features(const SynthFeaturesOptions& opt, std::ostream& out) {
    const CaptionSet captions = read_descriptions_file(io::read_file(opt.descriptions));
    std::vector<std::string> ids;
    ids.reserve(captions.entries.size());
    for (const auto& [id, caps] : captions.entries) ids.push_back(id);
    const FeatureStore store = synth_features(ids, opt.feature_dim, opt.seed);
    io::write_file_atomic(opt.out, write_store(store));
    out << "wrote " << store.size() << " feature vectors (dim " << store.dim() << ") to " << opt.out.string()
        << '\n';
    return 0;
}

int run_train(const TrainOptions& opt, std::ostream& out) {
    const CaptionSet captions = read_descriptions_file(io::read_file(opt.descriptions));
    const Vocabulary vocab = build_vocabulary(captions, opt.min_count);
    const FeatureStore features = read_store(io::read_file(opt.features));
    if (features.dim() != opt.feature_dim)
        throw DimMismatch("feature store dim " + std::to_string(features.dim()) + " != --feature-dim " +
                          std::to_string(opt.feature_dim));
    for (const auto& [id, caps] : captions.entries)
        for (const auto& caption : caps) {
            const std::size_t len = vocab.encode(caption).size();
            if (len > opt.max_len) throw CaptionTooLong(id, len, opt.max_len);
        }

    nn::OptimizerConfig ocfg;
    if (opt.optimizer == "adam")
        ocfg.kind = nn::OptimizerConfig::Kind::adam;
    else if (opt.optimizer == "sgd")
        ocfg.kind = nn::OptimizerConfig::Kind::sgd;
    else
        throw InvalidConfig("--optimizer must be 'adam' or 'sgd', got '" + opt.optimizer + "'");
    ocfg.learning_rate = opt.lr;

    ModelConfig mcfg;
    mcfg.feature_dim = opt.feature_dim;
    mcfg.max_len = opt.max_len;
    mcfg.embed_dim = opt.embed_dim;
    mcfg.hidden_dim = opt.hidden_dim;
    mcfg.vocab_size = vocab.size();
    mcfg.dropout_rate = opt.dropout;
    MergeModel<float> model = MergeModel<float>::init_random(mcfg, opt.seed);

    std::filesystem::create_directories(opt.out_dir);
    std::map<std::string, std::string> manifest;
    manifest["command"] = "train";
    manifest["descriptions"] = opt.descriptions.string();
    manifest["dropout"] = fmt("%g", opt.dropout);
    manifest["embed_dim"] = std::to_string(opt.embed_dim);
    manifest["epochs"] = std::to_string(opt.epochs);
    manifest["feature_dim"] = std::to_string(opt.feature_dim);
    manifest["features"] = opt.features.string();
    manifest["hidden_dim"] = std::to_string(opt.hidden_dim);
    manifest["images_per_batch"] = std::to_string(opt.images_per_batch);
    manifest["lr"] = fmt("%g", opt.lr);
    manifest["max_len"] = std::to_string(opt.max_len);
    manifest["min_count"] = std::to_string(opt.min_count);
    manifest["optimizer"] = opt.optimizer;
    manifest["out"] = opt.out_dir.string();
    manifest["seed"] = std::to_string(opt.seed);
    manifest["shuffle"] = opt.no_shuffle ? "false" : "true";
    manifest["vocab_size"] = std::to_string(vocab.size());
    std::string manifest_text;
    for (const auto& [k, v] : manifest) manifest_text += k + "=" + v + "\n";
    io::write_file_atomic(opt.out_dir / "run_manifest.txt", manifest_text);

    TrainConfig tcfg;
    tcfg.epochs = opt.epochs;
    tcfg.images_per_batch = opt.images_per_batch;
    tcfg.seed = opt.seed;
    tcfg.shuffle = !opt.no_shuffle;
    tcfg.optimizer = ocfg;
    tcfg.checkpoint_dir = opt.out_dir;
    tcfg.log = &out;
    const TrainReport report = train(model, captions, features, vocab, tcfg);

    io::write_file_atomic(opt.out_dir / "loss.csv", write_loss_csv(report.epoch_losses));
    out << "training complete: " << report.epochs << " epochs, " << report.samples_per_epoch
        << " samples/epoch, final mean loss " << fmt("%.6f", report.epoch_losses.back()) << '\n';
    return 0;
}

namespace {

// Decodes every image in the caption set and pairs the result with its
// sentinel-stripped references.
bleu::CandidateSet decode_corpus(const MergeModel<float>& model, const Vocabulary& vocab,
                                 const CaptionSet& captions, const FeatureStore& features) {
    bleu::CandidateSet set;
    for (const auto& [id, caps] : captions.entries) {
        bleu::Entry entry;
        entry.image_id = id;
        entry.candidate = greedy_decode(model, features.require(id), vocab, model.config().max_len);
        for (const auto& caption : caps)
            entry.references.emplace_back(caption.begin() + 1, caption.end() - 1);
        set.push_back(std::move(entry));
    }
    return set;
}

}  // namespace

int run_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
    const bleu::Smoothing smoothing = parse_smoothing(opt.smoothing);
    const auto custom = parse_custom_bleu(opt.bleu);
    const LoadedCheckpoint loaded = load_checkpoint(io::read_file(opt.checkpoint));
    const FeatureStore features = read_store(io::read_file(opt.features));
    if (features.dim() != loaded.model.config().feature_dim)
        throw DimMismatch("feature store dim " + std::to_string(features.dim()) + " != checkpoint feature_dim " +
                          std::to_string(loaded.model.config().feature_dim));
    const CaptionSet captions = read_descriptions_file(io::read_file(opt.descriptions));
    if (captions.empty()) throw EmptyCorpus();

    std::vector<std::string> missing;
    for (const auto& [id, caps] : captions.entries)
        if (!features.find(id)) missing.push_back(id);
    if (!missing.empty()) {
        for (const auto& id : missing) err << "MissingFeature: no feature vector for image '" << id << "'\n";
        return 3;
    }

    const bleu::CandidateSet set = decode_corpus(loaded.model, loaded.vocab, captions, features);
    if (opt.out_tsv) io::write_file_atomic(*opt.out_tsv, bleu::write_candidate_tsv(set));
    print_bleu_analysis(out, set, smoothing, custom);
    return 0;
}

int run_bleu(const BleuOptions& opt, std::ostream& out) {
    const bleu::Smoothing smoothing = parse_smoothing(opt.smoothing);
    const auto custom = parse_custom_bleu(opt.bleu);
    const bleu::CandidateSet set = bleu::parse_candidate_tsv(io::read_file(opt.tsv));
    if (set.empty()) throw EmptyCorpus();
    print_bleu_analysis(out, set, smoothing, custom);
    return 0;
}

namespace {

std::vector<float> parse_vector_file(const std::string& text) {
    std::vector<float> values;
    std::size_t i = 0;
    const auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r'; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !is_space(text[j])) ++j;
        const std::string field = text.substr(i, j - i);
        char* end = nullptr;
        const double v = std::strtod(field.c_str(), &end);
        if (end != field.c_str() + field.size() || !std::isfinite(v))
            throw MalformedLine(1, "bad vector component '" + field + "'");
        values.push_back(static_cast<float>(v));
        i = j;
    }
    return values;
}

}  // namespace

int run_caption(const CaptionOptions& opt, std::ostream& out) {
    const LoadedCheckpoint loaded = load_checkpoint(io::read_file(opt.checkpoint));
    const std::size_t feature_dim = loaded.model.config().feature_dim;

    std::string id;
    std::vector<float> feature;
    if (opt.image_id) {
        const FeatureStore features = read_store(io::read_file(opt.features));
        if (features.dim() != feature_dim)
            throw DimMismatch("feature store dim " + std::to_string(features.dim()) +
                              " != checkpoint feature_dim " + std::to_string(feature_dim));
        id = *opt.image_id;
        const std::span<const float> vec = features.require(id);
        feature.assign(vec.begin(), vec.end());
    } else {
        feature = parse_vector_file(io::read_file(opt.features));
        if (feature.size() != feature_dim)
            throw DimMismatch("vector file has " + std::to_string(feature.size()) +
                              " components, checkpoint expects " + std::to_string(feature_dim));
        id = strip_extension(opt.features.filename().string());
    }

    const std::vector<std::string> words =
        greedy_decode(loaded.model, feature, loaded.vocab, loaded.model.config().max_len);
    out << "[INFO] [" << id << "]: Generated Caption:";
    std::string joined;
    for (const auto& w : words) joined += " " + w;
    out << joined << '\n';
    return 0;
}

int run_plot_loss(const PlotLossOptions& opt, std::ostream& out) {
    const std::vector<LossRow> rows = parse_loss_csv(io::read_file(opt.csv));
    io::write_file_atomic(opt.out, render_loss_svg(rows));
    out << "wrote " << opt.out.string() << " (" << rows.size() << " points)" << '\n';
    return 0;
}

}  // namespace capgen::cmd
