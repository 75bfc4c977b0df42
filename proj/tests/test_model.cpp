#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "capgen/checkpoint.hpp"
#include "capgen/decode.hpp"
#include "capgen/grad_check.hpp"
#include "capgen/model.hpp"
#include "capgen/rng.hpp"

using namespace capgen;

namespace {

ModelConfig small_config() {
    ModelConfig cfg;
    cfg.feature_dim = 8;
    cfg.max_len = 5;
    cfg.embed_dim = 6;
    cfg.hidden_dim = 6;
    cfg.vocab_size = 9;
    cfg.dropout_rate = 0.5;
    return cfg;
}

Vocabulary rig_vocab() {
    // cat=1 dog=2 endseq=3 runs=4 startseq=5, size()=6 with the padding slot
    return Vocabulary::from_words({"cat", "dog", "endseq", "runs", "startseq"});
}

ModelConfig rig_config() {
    ModelConfig cfg;
    cfg.feature_dim = 4;
    cfg.max_len = 6;
    cfg.embed_dim = 3;
    cfg.hidden_dim = 3;
    cfg.vocab_size = 6;
    cfg.dropout_rate = 0.0;
    return cfg;
}

template <typename T>
void fill_random(Tensor<T>& t, rng::Stream& stream, double lo = -1.0, double hi = 1.0) {
    for (auto& v : t.values()) v = static_cast<T>(stream.next_uniform(lo, hi));
}

IndexTensor random_seqs(std::size_t batch, std::size_t max_len, std::size_t vocab_size, rng::Stream& stream) {
    IndexTensor seqs({batch, max_len});
    for (auto& v : seqs.values()) v = static_cast<std::int32_t>(stream.next_below(vocab_size));
    return seqs;
}

}  // namespace

TEST_CASE("parameter count at full scale") {
    ModelConfig cfg;
    cfg.feature_dim = 4096;
    cfg.max_len = 34;
    cfg.embed_dim = 256;
    cfg.hidden_dim = 256;
    cfg.vocab_size = 7579;
    MergeModel<float> model(cfg);

    const auto& cell = model.lstm();
    const std::size_t lstm_params = cell.w_f.value.size() + cell.w_i.value.size() + cell.w_o.value.size() +
                                    cell.w_c.value.size() + cell.b_f.value.size() + cell.b_i.value.size() +
                                    cell.b_o.value.size() + cell.b_c.value.size();
    CHECK(lstm_params == 4 * (256 * (256 + 256)) + 4 * 256);
    CHECK(lstm_params == 525312);

    const std::size_t expected = (256 * 4096 + 256)      // image dense
                                 + 7579 * 256            // embedding
                                 + 525312                // lstm
                                 + (256 * 256 + 256)     // decoder dense
                                 + (7579 * 256 + 7579);  // output dense
    CHECK(model.parameter_count() == expected);
}

TEST_CASE("config validation") {
    ModelConfig cfg = small_config();
    cfg.vocab_size = 2;
    CHECK_THROWS_AS((MergeModel<float>(cfg)), InvalidConfig);
    cfg = small_config();
    cfg.dropout_rate = 1.0;
    CHECK_THROWS_AS((MergeModel<float>(cfg)), InvalidConfig);
    cfg = small_config();
    cfg.embed_dim = 0;
    CHECK_THROWS_AS((MergeModel<float>(cfg)), InvalidConfig);
}

TEST_CASE("init_random is deterministic in the seed") {
    const ModelConfig cfg = small_config();
    auto a = MergeModel<float>::init_random(cfg, 42);
    auto b = MergeModel<float>::init_random(cfg, 42);
    auto c = MergeModel<float>::init_random(cfg, 43);

    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    bool any_diff_seed43 = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i]->value.size() == pb[i]->value.size());
        for (std::size_t k = 0; k < pa[i]->value.size(); ++k) {
            CHECK(pa[i]->value[k] == pb[i]->value[k]);
            if (pa[i]->value[k] != pc[i]->value[k]) any_diff_seed43 = true;
        }
    }
    CHECK(any_diff_seed43);

    // forget-gate bias starts at 1, all other biases at 0
    for (float v : a.lstm().b_f.value.values()) CHECK(v == 1.0f);
    for (float v : a.lstm().b_i.value.values()) CHECK(v == 0.0f);
}

TEST_CASE("forward emits one probability row per sample") {
    const ModelConfig cfg = small_config();
    auto model = MergeModel<float>::init_random(cfg, 7);
    rng::Stream stream(11);

    TensorF features({3, cfg.feature_dim});
    fill_random(features, stream);
    const IndexTensor seqs = random_seqs(3, cfg.max_len, cfg.vocab_size, stream);

    const TensorF probs = model.forward(features, seqs, nn::Mode::infer);
    REQUIRE(probs.dim(0) == 3);
    REQUIRE(probs.dim(1) == cfg.vocab_size);
    for (std::size_t i = 0; i < 3; ++i) {
        float sum = 0.0f;
        for (std::size_t j = 0; j < cfg.vocab_size; ++j) {
            CHECK(probs.at(i, j) >= 0.0f);
            sum += probs.at(i, j);
        }
        CHECK(sum == doctest::Approx(1.0f).epsilon(1e-6));
    }

    // inference is deterministic and dropout-free
    const TensorF again = model.forward(features, seqs, nn::Mode::infer, /*dropout_key=*/999);
    for (std::size_t k = 0; k < probs.size(); ++k) CHECK(probs[k] == again[k]);
}

TEST_CASE("the image actually conditions the output") {
    const ModelConfig cfg = small_config();
    auto model = MergeModel<float>::init_random(cfg, 7);
    rng::Stream stream(13);

    TensorF zero({1, cfg.feature_dim});
    TensorF nonzero({1, cfg.feature_dim});
    fill_random(nonzero, stream, 0.5, 1.5);
    const IndexTensor seqs = random_seqs(1, cfg.max_len, cfg.vocab_size, stream);

    const TensorF pz = model.forward(zero, seqs, nn::Mode::infer);
    const TensorF pn = model.forward(nonzero, seqs, nn::Mode::infer);
    bool differs = false;
    for (std::size_t k = 0; k < pz.size(); ++k)
        if (pz[k] != pn[k]) differs = true;
    CHECK(differs);
}

TEST_CASE("train-mode dropout is keyed") {
    const ModelConfig cfg = small_config();
    auto model = MergeModel<float>::init_random(cfg, 7);
    rng::Stream stream(17);

    TensorF features({2, cfg.feature_dim});
    fill_random(features, stream);
    const IndexTensor seqs = random_seqs(2, cfg.max_len, cfg.vocab_size, stream);

    const TensorF a = model.forward(features, seqs, nn::Mode::train, 5);
    const TensorF b = model.forward(features, seqs, nn::Mode::train, 5);
    const TensorF c = model.forward(features, seqs, nn::Mode::train, 6);
    bool differs = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k] == b[k]);
        if (a[k] != c[k]) differs = true;
    }
    CHECK(differs);
}

TEST_CASE("full-model gradients match finite differences") {
    ModelConfig cfg = small_config();
    cfg.dropout_rate = 0.0;  // keep the loss smooth for the numeric probe

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto model = MergeModel<double>::init_random(cfg, seed);
        rng::Stream stream(rng::mix(400, seed));

        TensorD features({3, cfg.feature_dim});
        fill_random(features, stream);
        const IndexTensor seqs = random_seqs(3, cfg.max_len, cfg.vocab_size, stream);
        std::vector<std::int32_t> targets(3);
        for (auto& t : targets) t = 1 + static_cast<std::int32_t>(stream.next_below(cfg.vocab_size - 1));

        auto params = model.parameters();
        auto loss_and_grad = [&] { return model.loss_and_gradients(features, seqs, targets, 0); };
        auto loss_only = [&] {
            return nn::cross_entropy(model.forward(features, seqs, nn::Mode::train, 0), targets);
        };
        const auto report = nn::gradient_check(params, loss_and_grad, loss_only);
        INFO("seed ", seed, " max rel err ", report.max_rel_err());
        CHECK(report.passed(1e-4));
    }
}

TEST_CASE("checkpoint round-trip preserves behaviour bit for bit") {
    ModelConfig cfg = rig_config();
    auto model = MergeModel<float>::init_random(cfg, 99);
    const auto vocab = rig_vocab();

    const std::string bytes = save_checkpoint(model, vocab, 17, 1.25f);
    const LoadedCheckpoint loaded = load_checkpoint(bytes);

    CHECK(loaded.epoch == 17);
    CHECK(loaded.final_loss == 1.25f);
    CHECK(loaded.vocab == vocab);
    CHECK(loaded.model.config() == cfg);

    rng::Stream stream(5);
    TensorF features({2, cfg.feature_dim});
    fill_random(features, stream);
    const IndexTensor seqs = random_seqs(2, cfg.max_len, cfg.vocab_size, stream);
    const TensorF before = model.forward(features, seqs, nn::Mode::infer);
    const TensorF after = loaded.model.forward(features, seqs, nn::Mode::infer);
    REQUIRE(before.size() == after.size());
    for (std::size_t k = 0; k < before.size(); ++k) CHECK(before[k] == after[k]);

    // and the serialized form itself is stable
    CHECK(save_checkpoint(loaded.model, loaded.vocab, 17, 1.25f) == bytes);
}

TEST_CASE("checkpoint corruption is detected") {
    auto model = MergeModel<float>::init_random(rig_config(), 3);
    const auto vocab = rig_vocab();
    const std::string bytes = save_checkpoint(model, vocab, 1, 0.5f);

    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_checkpoint(bad), BadMagic);

    bad = bytes;
    bad[4] = static_cast<char>(0xEE);
    CHECK_THROWS_AS(load_checkpoint(bad), BadVersion);

    CHECK_THROWS_AS(load_checkpoint(bytes.substr(0, bytes.size() - 1)), TruncatedFile);
    CHECK_THROWS_AS(load_checkpoint(bytes.substr(0, 10)), TruncatedFile);
    CHECK_THROWS_AS(load_checkpoint(bytes + "z"), TruncatedFile);
    CHECK_THROWS_AS(load_checkpoint(""), TruncatedFile);

    // flip a character inside a parameter name
    bad = bytes;
    const std::size_t name_at = bad.find("dense_img.W");
    REQUIRE(name_at != std::string::npos);
    bad[name_at] = 'x';
    CHECK_THROWS_AS(load_checkpoint(bad), ShapeHeaderMismatch);

    // bump a dimension in the parameter table; payload length no longer fits
    bad = bytes;
    const std::size_t dims_at = name_at + std::string("dense_img.W").size() + 1;
    bad[dims_at] = static_cast<char>(bad[dims_at] + 1);
    const auto dim_tamper = [&] {
        try {
            load_checkpoint(bad);
            return false;
        } catch (const ShapeHeaderMismatch&) {
            return true;
        } catch (const TruncatedFile&) {
            return true;
        }
    };
    CHECK(dim_tamper());
}

TEST_CASE("saving with a mismatched vocabulary is refused") {
    auto model = MergeModel<float>::init_random(rig_config(), 3);  // vocab_size 6
    const auto vocab = Vocabulary::from_words({"endseq", "startseq"});
    CHECK_THROWS_AS(save_checkpoint(model, vocab, 0, 0.0f), VocabMismatch);
}

TEST_CASE("greedy decode stops at endseq") {
    MergeModel<float> model(rig_config());  // all-zero weights: probs = softmax(output bias)
    const auto vocab = rig_vocab();
    model.output_layer().b.value[vocab.end_index()] = 10.0f;

    const std::vector<float> feature(4, 0.25f);
    CHECK(greedy_decode(model, feature, vocab, 6).empty());
}

TEST_CASE("greedy decode caps the caption at max_len-1 words") {
    MergeModel<float> model(rig_config());
    const auto vocab = rig_vocab();
    model.output_layer().b.value[*vocab.find("dog")] = 10.0f;

    const std::vector<float> feature(4, 0.25f);
    const auto words = greedy_decode(model, feature, vocab, 6);
    CHECK(words == std::vector<std::string>(5, "dog"));
}

TEST_CASE("greedy decode breaks ties toward the lowest index") {
    MergeModel<float> model(rig_config());  // uniform probabilities everywhere
    const auto vocab = rig_vocab();
    const std::vector<float> feature(4, 0.0f);
    const auto words = greedy_decode(model, feature, vocab, 6);
    CHECK(words == std::vector<std::string>(5, "cat"));  // index 1 wins every tie
}

TEST_CASE("greedy decode never emits sentinels or padding") {
    MergeModel<float> model(rig_config());
    const auto vocab = rig_vocab();
    // make startseq the raw argmax; the decoder must skip it
    model.output_layer().b.value[vocab.start_index()] = 10.0f;

    const std::vector<float> feature(4, 1.0f);
    const auto words = greedy_decode(model, feature, vocab, 6);
    CHECK(words == std::vector<std::string>(5, "cat"));
    for (const auto& w : words) {
        CHECK(w != "startseq");
        CHECK(w != "endseq");
    }
}

TEST_CASE("greedy decode is deterministic") {
    const ModelConfig cfg = rig_config();
    auto model = MergeModel<float>::init_random(cfg, 21);
    const auto vocab = rig_vocab();
    std::vector<float> feature = {0.1f, 0.9f, 0.3f, 0.7f};
    CHECK(greedy_decode(model, feature, vocab, cfg.max_len) == greedy_decode(model, feature, vocab, cfg.max_len));
}

TEST_CASE("greedy decode validates its inputs") {
    MergeModel<float> model(rig_config());
    const auto vocab = rig_vocab();
    CHECK_THROWS_AS(greedy_decode(model, std::vector<float>(3, 0.0f), vocab, 6), DimMismatch);
    const auto other = Vocabulary::from_words({"endseq", "startseq"});  // size 3 != 6
    CHECK_THROWS_AS(greedy_decode(model, std::vector<float>(4, 0.0f), other, 6), VocabMismatch);
}
