#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "capgen/grad_check.hpp"
#include "capgen/nn.hpp"
#include "capgen/rng.hpp"
#include "capgen/tensor.hpp"

using namespace capgen;
using nn::Activation;
using nn::Mode;

namespace {

template <typename T>
void fill_random(Tensor<T>& t, rng::Stream& stream, double scale = 1.0) {
    for (auto& v : t.values()) v = static_cast<T>((stream.next_u01() * 2.0 - 1.0) * scale);
}

// Fixed projection to a scalar loss so gradients are non-uniform.
TensorD make_coeffs(const std::vector<std::size_t>& shape, std::uint64_t seed) {
    TensorD c(shape);
    rng::Stream stream(seed);
    fill_random(c, stream);
    return c;
}

double dot_loss(const TensorD& y, const TensorD& c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += y[i] * c[i];
    return sum;
}

}  // namespace

TEST_CASE("dense identity and hand-computed relu example") {
    nn::Dense<double> layer;
    layer.reset("d", 2, 2, Activation::linear);
    layer.W.value = TensorD({2, 2}, {1, 0, 0, 1});
    TensorD x({3, 2}, {1, 2, -3, 4, 0.5, -0.25});
    CHECK(layer.forward(x) == x);

    nn::Dense<double> relu;
    relu.reset("r", 2, 2, Activation::relu);
    relu.W.value = TensorD({2, 2}, {1, 1, 0, 1});
    relu.b.value = TensorD({2}, {0.5, -0.5});
    TensorD x2({1, 2}, {1, 2});
    const TensorD y = relu.forward(x2);
    CHECK(y.at(0, 0) == doctest::Approx(3.5));
    CHECK(y.at(0, 1) == doctest::Approx(1.5));

    // relu clamps negatives to zero
    relu.b.value = TensorD({2}, {-10.0, -0.5});
    const TensorD y2 = relu.forward(x2);
    CHECK(y2.at(0, 0) == 0.0);

    CHECK_THROWS_AS(relu.forward(TensorD({1, 3})), ShapeMismatch);
}

TEST_CASE("softmax rows: symmetry, normalization, shift invariance") {
    const TensorD sym = nn::softmax_rows(TensorD({1, 2}, {0.0, 0.0}));
    CHECK(sym.at(0, 0) == doctest::Approx(0.5));
    CHECK(sym.at(0, 1) == doctest::Approx(0.5));

    // wide float rows still normalize to 1 within 1e-6
    TensorF wide({2, 7579});
    rng::Stream stream(99);
    fill_random(wide, stream, 4.0);
    const TensorF probs = nn::softmax_rows(wide);
    for (std::size_t i = 0; i < 2; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < probs.dim(1); ++j) {
            CHECK(probs.at(i, j) >= 0.0f);
            sum += probs.at(i, j);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }

    TensorD row({1, 4}, {0.1, -2.0, 3.0, 0.7});
    TensorD shifted = row;
    for (auto& v : shifted.values()) v += 123.0;
    const TensorD p1 = nn::softmax_rows(row);
    const TensorD p2 = nn::softmax_rows(shifted);
    for (std::size_t j = 0; j < 4; ++j) CHECK(p1[j] == doctest::Approx(p2[j]).epsilon(1e-6));
}

TEST_CASE("cross_entropy analytic values") {
    TensorD uniform({3, 10});
    for (auto& v : uniform.values()) v = 0.1;
    const std::vector<std::int32_t> targets = {0, 5, 9};
    CHECK(nn::cross_entropy(uniform, targets) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

    TensorD certain({1, 4}, {0.0, 0.0, 1.0, 0.0});
    const std::vector<std::int32_t> t2 = {2};
    CHECK(nn::cross_entropy(certain, t2) == doctest::Approx(0.0));

    TensorD probs({1, 3}, {0.7, 0.2, 0.1});
    const std::vector<std::int32_t> t3 = {1};
    CHECK(nn::cross_entropy(probs, t3) == doctest::Approx(1.609438).epsilon(1e-6));

    const std::vector<std::int32_t> bad = {3};
    CHECK_THROWS_AS(nn::cross_entropy(probs, bad), IndexOutOfRange);
    // zero probability is clamped, not -inf
    TensorD zerop({1, 2}, {1.0, 0.0});
    const std::vector<std::int32_t> t4 = {1};
    CHECK(std::isfinite(nn::cross_entropy(zerop, t4)));
}

TEST_CASE("fused softmax+xent gradient equals the explicit Jacobian route") {
    rng::Stream stream(7);
    TensorD logits({3, 5});
    fill_random(logits, stream, 2.0);
    const std::vector<std::int32_t> targets = {4, 0, 2};

    nn::Dense<double> a, b;
    a.reset("a", 5, 4, Activation::softmax);
    b.reset("b", 5, 4, Activation::softmax);
    fill_random(a.W.value, stream, 0.8);
    fill_random(a.b.value, stream, 0.2);
    b.W.value = a.W.value;
    b.b.value = a.b.value;

    TensorD x({3, 4});
    fill_random(x, stream);

    typename nn::Dense<double>::Cache ca, cb;
    const TensorD pa = a.forward(x, &ca);
    const TensorD pb = b.forward(x, &cb);
    REQUIRE(pa == pb);

    // route A: fused (probs - onehot)/batch applied to the pre-activation
    const TensorD fused = nn::softmax_xent_grad(pa, targets);
    const TensorD dxa = a.backward_preact(ca, fused);

    // route B: d(mean CE)/d(probs) through the softmax Jacobian
    TensorD dprobs({3, 5});
    for (std::size_t i = 0; i < 3; ++i)
        dprobs.at(i, static_cast<std::size_t>(targets[i])) =
            -1.0 / (3.0 * pb.at(i, static_cast<std::size_t>(targets[i])));
    const TensorD dxb = b.backward(cb, dprobs);

    REQUIRE(dxa.same_shape(dxb));
    for (std::size_t i = 0; i < dxa.size(); ++i) CHECK(dxa[i] == doctest::Approx(dxb[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < a.W.grad.size(); ++i)
        CHECK(a.W.grad[i] == doctest::Approx(b.W.grad[i]).epsilon(1e-12));
}

TEST_CASE("dense gradient check across activations and seeds") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u}) {
        for (Activation act : {Activation::linear, Activation::relu, Activation::softmax}) {
            nn::Dense<double> layer;
            layer.reset("dense", 4, 3, act);
            rng::Stream stream(rng::mix(seed, static_cast<std::uint64_t>(act)));
            fill_random(layer.W.value, stream, 0.7);
            fill_random(layer.b.value, stream, 0.3);
            TensorD x({5, 3});
            fill_random(x, stream);
            const TensorD c = make_coeffs({5, 4}, rng::mix(seed, 77));

            std::vector<nn::Parameter<double>*> params = {&layer.W, &layer.b};
            auto loss_and_grad = [&] {
                typename nn::Dense<double>::Cache cache;
                const TensorD y = layer.forward(x, &cache);
                layer.backward(cache, c, /*need_dx=*/false);
                return dot_loss(y, c);
            };
            auto loss_only = [&] { return dot_loss(layer.forward(x), c); };
            const auto report = nn::gradient_check(params, loss_and_grad, loss_only);
            CHECK(report.passed(1e-4));
        }
    }
}

TEST_CASE("deliberately corrupted dense backward fails the check at ~0.5") {
    nn::Dense<double> layer;
    layer.reset("dense", 3, 3, Activation::linear);
    rng::Stream stream(11);
    fill_random(layer.W.value, stream);
    fill_random(layer.b.value, stream);
    TensorD x({4, 3});
    fill_random(x, stream);
    const TensorD c = make_coeffs({4, 3}, 13);

    std::vector<nn::Parameter<double>*> params = {&layer.W};
    auto loss_and_grad = [&] {
        typename nn::Dense<double>::Cache cache;
        const TensorD y = layer.forward(x, &cache);
        layer.backward(cache, c, false);
        for (auto& g : layer.W.grad.values()) g *= 2.0;  // the corruption
        return dot_loss(y, c);
    };
    auto loss_only = [&] { return dot_loss(layer.forward(x), c); };
    const auto report = nn::gradient_check(params, loss_and_grad, loss_only);
    CHECK(!report.passed(1e-4));
    // |2g - g| / max(2g, g) = 1/2 for every component
    CHECK(report.max_rel_err() == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("embedding forward looks up rows, backward accumulates per occurrence") {
    nn::Embedding<double> emb;
    emb.reset("E", 4, 2);
    emb.table.value = TensorD({4, 2}, {0, 0, 10, 11, 20, 21, 30, 31});

    IndexTensor idx({1, 3});
    idx.values() = {2, 0, 2};
    const TensorD out = emb.forward(idx);
    CHECK(out.at(0, 0, 0) == 20.0);
    CHECK(out.at(0, 0, 1) == 21.0);
    CHECK(out.at(0, 1, 0) == 0.0);  // padding row
    CHECK(out.at(0, 2, 0) == 20.0);

    TensorD dout({1, 3, 2});
    dout.values() = {1, 2, 100, 200, 10, 20};
    emb.backward(idx, dout);
    CHECK(emb.table.grad.at(2, 0) == 11.0);  // 1 + 10: repeated index accumulates
    CHECK(emb.table.grad.at(2, 1) == 22.0);
    CHECK(emb.table.grad.at(0, 0) == 0.0);  // padding contribution dropped
    CHECK(emb.table.grad.at(0, 1) == 0.0);

    IndexTensor bad({1, 1});
    bad.values() = {4};
    CHECK_THROWS_AS(emb.forward(bad), IndexOutOfRange);
    bad.values() = {-1};
    CHECK_THROWS_AS(emb.forward(bad), IndexOutOfRange);
}

TEST_CASE("embedding gradient check skips the frozen padding row") {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        nn::Embedding<double> emb;
        emb.reset("E", 5, 3);
        rng::Stream stream(seed);
        fill_random(emb.table.value, stream);
        IndexTensor idx({2, 4});
        for (auto& v : idx.values()) v = static_cast<std::int32_t>(stream.next_below(5));
        const TensorD c = make_coeffs({2, 4, 3}, rng::mix(seed, 3));

        std::vector<nn::Parameter<double>*> params = {&emb.table};
        auto loss_and_grad = [&] {
            const TensorD y = emb.forward(idx);
            emb.backward(idx, c);
            return dot_loss(y, c);
        };
        auto loss_only = [&] { return dot_loss(emb.forward(idx), c); };
        const auto report = nn::gradient_check(params, loss_and_grad, loss_only);
        CHECK(report.passed(1e-4));
    }
}

TEST_CASE("dropout: inference identity, rate 0, masked backward replay") {
    nn::Dropout<double> drop;
    drop.rate = 0.5;
    TensorD x({3, 4});
    rng::Stream stream(5);
    fill_random(x, stream);

    CHECK(drop.forward(x, Mode::infer, 123) == x);

    drop.rate = 0.0;
    TensorD mask;
    CHECK(drop.forward(x, Mode::train, 123, &mask) == x);
    for (double m : mask.values()) CHECK(m == 1.0);

    drop.rate = 0.5;
    TensorD mask2;
    const TensorD y = drop.forward(x, Mode::train, 42, &mask2);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (mask2[i] != 0.0) {
            CHECK(mask2[i] == doctest::Approx(2.0));
            CHECK(y[i] == doctest::Approx(x[i] * 2.0));
            ++kept;
        } else {
            CHECK(y[i] == 0.0);
        }
    }
    CHECK(kept > 0);

    // backward multiplies by the very same mask
    TensorD dy({3, 4});
    fill_random(dy, stream);
    const TensorD dx = nn::Dropout<double>::backward(mask2, dy);
    for (std::size_t i = 0; i < dx.size(); ++i) CHECK(dx[i] == dy[i] * mask2[i]);

    // same key replays the identical mask; different keys differ
    TensorD mask3;
    drop.forward(x, Mode::train, 42, &mask3);
    CHECK(mask3 == mask2);
    TensorD mask4;
    drop.forward(x, Mode::train, 43, &mask4);
    CHECK(mask4 != mask2);
}

TEST_CASE("dropout preserves expectation under inverted scaling") {
    nn::Dropout<float> drop;
    drop.rate = 0.5;
    TensorF ones = TensorF::full({100, 100}, 1.0f);
    const TensorF out = drop.forward(ones, Mode::train, 2024);
    double mean = 0.0;
    for (float v : out.values()) mean += v;
    mean /= static_cast<double>(out.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("add_merge") {
    TensorD a({2, 2}, {1, 2, -1, 0.5});
    TensorD zero({2, 2});
    CHECK(nn::add_merge(a, zero) == a);

    TensorD u({1, 2}, {1, 2});
    TensorD v({1, 2}, {3, -1});
    const TensorD sum = nn::add_merge(u, v);
    CHECK(sum.at(0, 0) == 4.0);
    CHECK(sum.at(0, 1) == 1.0);
    CHECK(nn::add_merge(u, v) == nn::add_merge(v, u));

    CHECK_THROWS_AS(nn::add_merge(u, TensorD({2, 1})), ShapeMismatch);
}

TEST_CASE("glorot init is deterministic and bounded") {
    TensorD w1({20, 30}), w2({20, 30});
    rng::Stream s1(9), s2(9);
    nn::glorot_uniform(w1, 30, 20, s1);
    nn::glorot_uniform(w2, 30, 20, s2);
    CHECK(w1 == w2);
    const double limit = std::sqrt(6.0 / 50.0);
    for (double v : w1.values()) CHECK(std::abs(v) <= limit);

    rng::Stream s3(10);
    TensorD w3({20, 30});
    nn::glorot_uniform(w3, 30, 20, s3);
    CHECK(w1 != w3);
}
