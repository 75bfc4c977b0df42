#include "capgen/checkpoint.hpp"

#include <cstddef>
#include <vector>

#include "capgen/errors.hpp"
#include "capgen/io.hpp"

namespace capgen {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string save_checkpoint(const MergeModel<float>& model, const Vocabulary& vocab, std::uint32_t epoch,
                            float final_loss) {
    const ModelConfig& cfg = model.config();
    if (cfg.vocab_size != vocab.size()) throw VocabMismatch(cfg.vocab_size, vocab.size());

    std::string out;
    out.append(kMagic, 4);
    io::put_u32le(out, kVersion);

    io::put_u32le(out, static_cast<std::uint32_t>(cfg.feature_dim));
    io::put_u32le(out, static_cast<std::uint32_t>(cfg.max_len));
    io::put_u32le(out, static_cast<std::uint32_t>(cfg.embed_dim));
    io::put_u32le(out, static_cast<std::uint32_t>(cfg.hidden_dim));
    io::put_u32le(out, static_cast<std::uint32_t>(cfg.vocab_size));
    io::put_u32le(out, 0);  // reserved
    io::put_f32le(out, static_cast<float>(cfg.dropout_rate));

    io::put_u32le(out, static_cast<std::uint32_t>(vocab.word_count()));
    for (const std::string& w : vocab.words()) {
        io::put_u16le(out, static_cast<std::uint16_t>(w.size()));
        out.append(w);
    }

    const auto params = model.parameters();
    io::put_u32le(out, static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
        io::put_u16le(out, static_cast<std::uint16_t>(p->name.size()));
        out.append(p->name);
        out.push_back(static_cast<char>(p->value.ndim()));
        for (std::size_t d = 0; d < p->value.ndim(); ++d)
            io::put_u32le(out, static_cast<std::uint32_t>(p->value.dim(d)));
        for (float v : p->value.values()) io::put_f32le(out, v);
    }

    io::put_u32le(out, epoch);
    io::put_f32le(out, final_loss);
    return out;
}

LoadedCheckpoint load_checkpoint(std::string_view bytes) {
    io::Reader r(bytes);

    std::string_view magic = r.get_bytes<TruncatedFile>(4, "magic");
    if (magic != std::string_view(kMagic, 4))
        throw BadMagic("bad checkpoint magic: expected 'MCPT'");
    std::uint32_t version = r.get_u32le<TruncatedFile>("version");
    if (version != kVersion) throw BadVersion("checkpoint", version);

    ModelConfig cfg;
    cfg.feature_dim = r.get_u32le<TruncatedFile>("feature_dim");
    cfg.max_len = r.get_u32le<TruncatedFile>("max_len");
    cfg.embed_dim = r.get_u32le<TruncatedFile>("embed_dim");
    cfg.hidden_dim = r.get_u32le<TruncatedFile>("hidden_dim");
    cfg.vocab_size = r.get_u32le<TruncatedFile>("vocab_size");
    r.get_u32le<TruncatedFile>("reserved");
    cfg.dropout_rate = r.get_f32le<TruncatedFile>("dropout_rate");

    std::uint32_t word_count = r.get_u32le<TruncatedFile>("vocabulary count");
    if (static_cast<std::size_t>(word_count) + 1 != cfg.vocab_size)
        throw ShapeHeaderMismatch("vocabulary holds " + std::to_string(word_count) +
                                  " words but config expects vocab_size " + std::to_string(cfg.vocab_size));
    std::vector<std::string> words;
    words.reserve(word_count);
    for (std::uint32_t i = 0; i < word_count; ++i) {
        std::uint16_t len = r.get_u16le<TruncatedFile>("word length");
        words.emplace_back(r.get_bytes<TruncatedFile>(len, "word bytes"));
    }

    LoadedCheckpoint loaded{MergeModel<float>(cfg), Vocabulary{}, 0, 0.0f};
    try {
        loaded.vocab = Vocabulary::from_words(std::move(words));
    } catch (const InvalidConfig& e) {
        throw ShapeHeaderMismatch(std::string("checkpoint vocabulary invalid: ") + e.what());
    }

    auto params = loaded.model.parameters();
    std::uint32_t param_count = r.get_u32le<TruncatedFile>("parameter count");
    if (param_count != params.size())
        throw ShapeHeaderMismatch("parameter table holds " + std::to_string(param_count) +
                                  " tensors, expected " + std::to_string(params.size()));
    for (auto* p : params) {
        std::uint16_t name_len = r.get_u16le<TruncatedFile>("parameter name length");
        std::string_view name = r.get_bytes<TruncatedFile>(name_len, "parameter name");
        if (name != p->name)
            throw ShapeHeaderMismatch("parameter '" + std::string(name) + "' where '" + p->name +
                                      "' was expected");
        std::uint8_t ndim = static_cast<std::uint8_t>(r.get_bytes<TruncatedFile>(1, "parameter rank")[0]);
        std::vector<std::size_t> dims(ndim);
        for (auto& d : dims) d = r.get_u32le<TruncatedFile>("parameter dim");
        if (dims != p->value.shape())
            throw ShapeHeaderMismatch("parameter '" + p->name + "': stored shape does not match config (" +
                                      p->value.shape_str() + " expected)");
        r.need<TruncatedFile>(p->value.size() * 4, "parameter data");
        for (auto& v : p->value.values()) v = r.get_f32le<TruncatedFile>("parameter data");
    }

    loaded.epoch = r.get_u32le<TruncatedFile>("epoch");
    loaded.final_loss = r.get_f32le<TruncatedFile>("final loss");
    if (!r.at_end())
        throw TruncatedFile(std::to_string(r.remaining()) + " trailing bytes after the checkpoint footer");
    return loaded;
}

}  // namespace capgen
