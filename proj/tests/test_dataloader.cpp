#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "capgen/dataloader.hpp"

using namespace capgen;

namespace {

Vocabulary tiny_vocab() {
    // indices: cat=1 dog=2 endseq=3 runs=4 sat=5 startseq=6 the=7
    return Vocabulary::from_words({"cat", "dog", "endseq", "runs", "sat", "startseq", "the"});
}

struct Corpus {
    CaptionSet captions;
    FeatureStore store{2};
};

// `image k` gets feature {k, k/2} so rows are traceable back to their image.
Corpus make_corpus(std::size_t images, std::size_t words_per_caption) {
    Corpus c;
    std::vector<std::string> caption = {"startseq"};
    for (std::size_t w = 0; w < words_per_caption; ++w) caption.push_back(w % 2 ? "dog" : "cat");
    caption.push_back("endseq");
    for (std::size_t k = 0; k < images; ++k) {
        const std::string id = "img" + std::to_string(1000 + k);
        c.captions.entries[id] = {caption};
        const float f = static_cast<float>(k);
        c.store.insert(id, std::vector<float>{f, f / 2});
    }
    return c;
}

using Row = std::tuple<float, std::vector<std::int32_t>, std::int32_t>;

std::vector<Row> drain(BatchStream& stream, std::size_t max_len) {
    std::vector<Row> rows;
    while (auto batch = stream.next()) {
        for (std::size_t i = 0; i < batch->size(); ++i) {
            std::vector<std::int32_t> seq(batch->seqs.row(i), batch->seqs.row(i) + max_len);
            rows.emplace_back(batch->features.at(i, 0), std::move(seq), batch->targets[i]);
        }
    }
    return rows;
}

}  // namespace

TEST_CASE("caption expansion follows the right-aligned prefix scheme") {
    const std::vector<std::int32_t> encoded = {1, 5, 7, 2};
    const std::vector<float> feature = {0.5f, 0.25f};
    const auto samples = expand_caption(encoded, feature, 6);

    REQUIRE(samples.size() == 3);
    CHECK(samples[0].input_seq == std::vector<std::int32_t>{0, 0, 0, 0, 0, 1});
    CHECK(samples[0].target_index == 5);
    CHECK(samples[1].input_seq == std::vector<std::int32_t>{0, 0, 0, 0, 1, 5});
    CHECK(samples[1].target_index == 7);
    CHECK(samples[2].input_seq == std::vector<std::int32_t>{0, 0, 0, 1, 5, 7});
    CHECK(samples[2].target_index == 2);
    for (const auto& s : samples) CHECK(s.feature == feature);
}

TEST_CASE("two-token caption expands to a single sample") {
    const std::vector<std::int32_t> encoded = {6, 3};
    const auto samples = expand_caption(encoded, std::vector<float>{1.0f}, 4);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].input_seq == std::vector<std::int32_t>{0, 0, 0, 6});
    CHECK(samples[0].target_index == 3);
}

TEST_CASE("caption length bounds") {
    const std::vector<float> feature = {1.0f};
    CHECK(expand_caption(std::vector<std::int32_t>{1, 2, 3, 4}, feature, 4).size() == 3);
    CHECK_THROWS_AS(expand_caption(std::vector<std::int32_t>{1, 2, 3, 4, 5}, feature, 4), CaptionTooLong);
    CHECK_THROWS_AS(expand_caption(std::vector<std::int32_t>{1}, feature, 4), CaptionTooShort);
    CHECK_THROWS_AS(expand_caption(std::vector<std::int32_t>{}, feature, 4), CaptionTooShort);
}

TEST_CASE("one_hot") {
    CHECK(one_hot(2, 4) == std::vector<float>{0, 0, 1, 0});
    CHECK(one_hot(0, 1) == std::vector<float>{1});
    CHECK_THROWS_AS(one_hot(4, 4), IndexOutOfRange);
    CHECK_THROWS_AS(one_hot(-1, 4), IndexOutOfRange);
}

TEST_CASE("stream yields every expanded sample exactly once, in id order when unshuffled") {
    auto corpus = make_corpus(3, 2);  // each caption: startseq cat dog endseq -> 3 samples
    const auto vocab = tiny_vocab();
    BatchStream stream(corpus.captions, corpus.store, vocab, {.max_len = 5, .shuffle = false});

    auto batch = stream.next();
    REQUIRE(batch.has_value());
    CHECK(batch->size() == 3);
    CHECK(batch->features.at(0, 0) == 0.0f);  // img1000 first
    CHECK(std::vector<std::int32_t>(batch->seqs.row(0), batch->seqs.row(0) + 5) ==
          std::vector<std::int32_t>{0, 0, 0, 0, 6});
    CHECK(batch->targets == std::vector<std::int32_t>{1, 2, 3});  // cat dog endseq

    CHECK(stream.next()->features.at(0, 0) == 1.0f);
    CHECK(stream.next()->features.at(0, 0) == 2.0f);
    CHECK_FALSE(stream.next().has_value());
    CHECK(stream.total_samples() == 9);
}

TEST_CASE("sample count is conserved across batch sizes and seeds") {
    auto corpus = make_corpus(7, 3);
    corpus.captions.entries["img1002"].push_back({"startseq", "the", "dog", "runs", "endseq"});
    const auto vocab = tiny_vocab();
    const std::size_t expected = 7 * 4 + 4;  // 7 captions of 5 tokens + one of 6

    for (std::size_t per_batch : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{100}}) {
        for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
            BatchStream stream(corpus.captions, corpus.store, vocab,
                               {.max_len = 6, .images_per_batch = per_batch, .epoch_seed = seed});
            while (stream.next()) {
            }
            CHECK(stream.total_samples() == expected);
        }
    }
}

TEST_CASE("distinct seeds permute the epoch but preserve the sample multiset") {
    auto corpus = make_corpus(5, 2);
    const auto vocab = tiny_vocab();

    BatchStream a(corpus.captions, corpus.store, vocab, {.max_len = 5, .epoch_seed = 1});
    BatchStream b(corpus.captions, corpus.store, vocab, {.max_len = 5, .epoch_seed = 2});
    auto rows_a = drain(a, 5);
    auto rows_b = drain(b, 5);

    CHECK(rows_a != rows_b);  // different visit order
    std::sort(rows_a.begin(), rows_a.end());
    std::sort(rows_b.begin(), rows_b.end());
    CHECK(rows_a == rows_b);  // same samples
}

TEST_CASE("same seed replays the identical epoch") {
    auto corpus = make_corpus(6, 3);
    const auto vocab = tiny_vocab();
    BatchStream a(corpus.captions, corpus.store, vocab, {.max_len = 6, .epoch_seed = 9});
    BatchStream b(corpus.captions, corpus.store, vocab, {.max_len = 6, .epoch_seed = 9});
    CHECK(drain(a, 6) == drain(b, 6));
}

TEST_CASE("input rows are zero-padded on the left only") {
    auto corpus = make_corpus(4, 3);
    const auto vocab = tiny_vocab();
    BatchStream stream(corpus.captions, corpus.store, vocab, {.max_len = 8, .epoch_seed = 5});
    for (auto& [f, seq, target] : drain(stream, 8)) {
        bool seen_word = false;
        for (std::int32_t idx : seq) {
            if (idx != 0) seen_word = true;
            else CHECK_FALSE(seen_word);  // no padding after a real token
        }
        CHECK(seen_word);
        CHECK(target != 0);
    }
}

TEST_CASE("empty caption set yields nothing") {
    CaptionSet captions;
    FeatureStore store(2);
    const auto vocab = tiny_vocab();
    BatchStream stream(captions, store, vocab, {});
    CHECK_FALSE(stream.next().has_value());
    CHECK(stream.total_samples() == 0);
    CHECK(stream.peak_resident_samples() == 0);
}

TEST_CASE("missing feature vector is rejected up front") {
    auto corpus = make_corpus(2, 2);
    corpus.captions.entries["ghost"] = {{"startseq", "cat", "endseq"}};
    const auto vocab = tiny_vocab();
    CHECK_THROWS_AS(BatchStream(corpus.captions, corpus.store, vocab, {}), MissingFeature);
}

TEST_CASE("resident samples stay bounded by the batch window, not the corpus") {
    const auto vocab = tiny_vocab();
    const std::size_t per_image = 3;  // startseq cat dog endseq -> 3 samples

    std::size_t peak_small = 0, peak_large = 0;
    for (auto* peak : {&peak_small, &peak_large}) {
        const std::size_t images = peak == &peak_small ? 100 : 1000;
        auto corpus = make_corpus(images, 2);
        BatchStream stream(corpus.captions, corpus.store, vocab,
                           {.max_len = 5, .images_per_batch = 10, .epoch_seed = 3});
        while (stream.next()) {
        }
        *peak = stream.peak_resident_samples();
        CHECK(stream.total_samples() == images * per_image);
    }
    CHECK(peak_small == 10 * per_image);
    CHECK(peak_large == peak_small);  // 10x the corpus, same residency
}
