#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "support/fd_probe.hpp"
#include "techtexc/gradcheck.hpp"
#include "techtexc/layers.hpp"
#include "techtexc/rng.hpp"

using namespace techtexc;
using testsupport::layer_fd_report;
using testsupport::random_tensor;

TEST_CASE("embedding looks up rows") {
    Embedding<double> emb(4, 3);
    auto table = emb.table().value.flat();
    std::iota(table.begin(), table.end(), 0.0); // row r = [3r, 3r+1, 3r+2]

    SUBCASE("repeated pad id returns two copies of row 0") {
        const std::vector<std::int32_t> ids = {0, 0};
        const Tensor<double> out = emb.forward(ids);
        REQUIRE(out.shape() == std::vector<std::size_t>{2, 3});
        for (std::size_t t = 0; t < 2; ++t) {
            CHECK(out(t, 0) == 0.0);
            CHECK(out(t, 1) == 1.0);
            CHECK(out(t, 2) == 2.0);
        }
    }
    SUBCASE("plain lookup") {
        const std::vector<std::int32_t> ids = {2};
        const Tensor<double> out = emb.forward(ids);
        CHECK(out(0, 0) == 6.0);
        CHECK(out(0, 2) == 8.0);
    }
    SUBCASE("out-of-range id is an error") {
        const std::vector<std::int32_t> ids = {4};
        CHECK_THROWS_AS((void)emb.forward(ids), std::out_of_range);
    }
}

TEST_CASE("embedding gradient matches finite differences, pad row included") {
    Rng rng(11);
    Embedding<double> emb(6, 4);
    emb.initialize(rng);
    const std::vector<std::int32_t> ids = {0, 3, 3, 1, 5};

    // loss = sum of all output entries
    auto loss = [&] {
        const Tensor<double> y = emb.forward(ids);
        double s = 0.0;
        for (double v : y.flat()) s += v;
        return s;
    };
    emb.table().zero_grad();
    Tensor<double> ones(emb.forward(ids).shape());
    ones.fill(1.0);
    emb.forward(ids);
    emb.backward(ones);

    Param<double>* table = &emb.table();
    const auto report = check_gradients({&table, 1}, loss, 1e-5);
    CHECK(report.max_rel_error < 1e-4);
    // the pad row (id 0) is trained like any other row
    CHECK(emb.table().grad(0, 0) == doctest::Approx(1.0));
    CHECK(emb.table().grad(3, 0) == doctest::Approx(2.0)); // id 3 appears twice
    CHECK(emb.table().grad(2, 0) == 0.0);                  // unused row untouched
}

TEST_CASE("conv1d output length and zero-parameter case") {
    Conv1DRelu<double> conv(4, 3, 5);
    Tensor<double> x({100, 4});
    x.fill(0.5);
    const Tensor<double> out = conv.forward(x, false, nullptr);
    CHECK(out.shape() == std::vector<std::size_t>{96, 3});
    for (double v : out.flat()) CHECK(v == 0.0); // W=0, b=0, relu(0)=0

    Tensor<double> tiny({4, 4});
    CHECK_THROWS_AS((void)conv.forward(tiny, false, nullptr), std::invalid_argument);
}

TEST_CASE("conv1d matches the naive triple-loop oracle") {
    Rng rng(21);
    const std::size_t len = 7, in_dim = 3, filters = 2, kernel = 5;
    Conv1DRelu<double> conv(in_dim, filters, kernel);
    conv.initialize(rng);
    const Tensor<double> x = random_tensor({len, in_dim}, rng);

    const Tensor<double> got = conv.forward(x, false, nullptr);
    REQUIRE(got.shape() == std::vector<std::size_t>{3, 2});

    for (std::size_t t = 0; t < len - kernel + 1; ++t) {
        for (std::size_t f = 0; f < filters; ++f) {
            double acc = conv.bias().value(f);
            for (std::size_t k = 0; k < kernel; ++k) {
                for (std::size_t d = 0; d < in_dim; ++d) {
                    acc += x(t + k, d) * conv.weight().value(k, d, f);
                }
            }
            acc = std::max(acc, 0.0);
            CHECK(got(t, f) == doctest::Approx(acc).epsilon(1e-6));
        }
    }
}

TEST_CASE("convolution pre-activation is linear in the input") {
    // relu(z) - relu(-z) recovers the pre-activation z when bias is zero,
    // using only the public layer surface.
    Rng rng(31);
    const std::size_t len = 9, in_dim = 3, filters = 4;
    Conv1DRelu<double> pos(in_dim, filters, 5);
    Conv1DRelu<double> neg(in_dim, filters, 5);
    pos.initialize(rng);
    pos.bias().value.fill(0.0);
    neg.weight().value = pos.weight().value;
    for (double& v : neg.weight().value.flat()) v = -v;

    auto pre_activation = [&](const Tensor<double>& x) {
        Tensor<double> a = pos.forward(x, false, nullptr);
        const Tensor<double> b = neg.forward(x, false, nullptr);
        for (std::size_t i = 0; i < a.size(); ++i) a.flat()[i] -= b.flat()[i];
        return a;
    };

    const Tensor<double> x = random_tensor({len, in_dim}, rng);
    const Tensor<double> y = random_tensor({len, in_dim}, rng);
    const double alpha = 0.7, beta = -1.3;
    Tensor<double> mix({len, in_dim});
    for (std::size_t i = 0; i < mix.size(); ++i) {
        mix.flat()[i] = alpha * x.flat()[i] + beta * y.flat()[i];
    }

    const Tensor<double> lhs = pre_activation(mix);
    const Tensor<double> zx = pre_activation(x);
    const Tensor<double> zy = pre_activation(y);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        CHECK(lhs.flat()[i] ==
              doctest::Approx(alpha * zx.flat()[i] + beta * zy.flat()[i]).epsilon(1e-5));
    }
}

TEST_CASE("conv1d gradients match finite differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Rng rng(seed);
        Conv1DRelu<double> conv(3, 4, 5);
        conv.initialize(rng);
        const Tensor<double> x = random_tensor({11, 3}, rng);
        CHECK(layer_fd_report(conv, x, rng).max_rel_error < 1e-4);
    }
}

TEST_CASE("maxpool output lengths") {
    MaxPool1D<double> pool(5);
    Rng rng(5);
    CHECK(pool.forward(random_tensor({96, 2}, rng), false, nullptr).dim(0) == 19);
    CHECK(pool.forward(random_tensor({15, 2}, rng), false, nullptr).dim(0) == 3);
    CHECK(pool.forward(random_tensor({23, 4}, rng), false, nullptr).dim(0) == 4);
    Tensor<double> tiny({4, 2});
    CHECK_THROWS_AS((void)pool.forward(tiny, false, nullptr), std::invalid_argument);
}

TEST_CASE("maxpool equals the window-scan oracle; constants map to constants") {
    Rng rng(40);
    MaxPool1D<double> pool(5);
    const Tensor<double> x = random_tensor({23, 4}, rng);
    const Tensor<double> out = pool.forward(x, false, nullptr);
    for (std::size_t t = 0; t < out.dim(0); ++t) {
        for (std::size_t f = 0; f < 4; ++f) {
            double best = x(t * 5, f);
            for (std::size_t o = 1; o < 5; ++o) best = std::max(best, x(t * 5 + o, f));
            CHECK(out(t, f) == best);
        }
    }

    Tensor<double> constant({15, 3});
    constant.fill(2.5);
    const Tensor<double> c = pool.forward(constant, false, nullptr);
    for (double v : c.flat()) CHECK(v == 2.5);
}

TEST_CASE("maxpool backward routes one-hot to the first maximal position") {
    MaxPool1D<double> pool(3);
    Tensor<double> x({6, 1});
    // window 1 has a tie at positions 1 and 2
    const double vals[] = {0.0, 7.0, 7.0, 1.0, 5.0, 2.0};
    for (std::size_t i = 0; i < 6; ++i) x(i, 0) = vals[i];
    pool.forward(x, false, nullptr);
    Tensor<double> dy({2, 1});
    dy(0, 0) = 1.0;
    dy(1, 0) = 10.0;
    const Tensor<double> dx = pool.backward(dy);
    CHECK(dx(0, 0) == 0.0);
    CHECK(dx(1, 0) == 1.0); // first of the tied maxima
    CHECK(dx(2, 0) == 0.0);
    CHECK(dx(4, 0) == 10.0);

    // oracle comparison on random input: gradient lands exactly where the
    // window scan says the max is
    Rng rng(41);
    MaxPool1D<double> p5(5);
    const Tensor<double> rx = random_tensor({23, 4}, rng);
    p5.forward(rx, false, nullptr);
    Tensor<double> rdy({4, 4});
    fill_uniform(rdy, rng, -1.0, 1.0);
    const Tensor<double> rdx = p5.backward(rdy);
    for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t f = 0; f < 4; ++f) {
            std::size_t best = t * 5;
            for (std::size_t o = 1; o < 5; ++o) {
                if (rx(t * 5 + o, f) > rx(best, f)) best = t * 5 + o;
            }
            for (std::size_t i = t * 5; i < t * 5 + 5; ++i) {
                CHECK(rdx(i, f) == (i == best ? rdy(t, f) : 0.0));
            }
        }
    }
}

TEST_CASE("maxpool gradient passes finite differences") {
    Rng rng(42);
    MaxPool1D<double> pool(5);
    const Tensor<double> x = random_tensor({23, 4}, rng);
    CHECK(layer_fd_report(pool, x, rng).max_rel_error < 1e-4);
}

TEST_CASE("dropout") {
    Rng rng(50);
    Tensor<double> x = random_tensor({20, 10}, rng);

    SUBCASE("inference mode is bit-identical to the input") {
        Dropout<double> drop(0.2);
        const Tensor<double> y = drop.forward(x, false, nullptr);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.flat()[i] == x.flat()[i]);
        // and backward is the identity as well
        const Tensor<double> dx = drop.backward(x);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(dx.flat()[i] == x.flat()[i]);
    }
    SUBCASE("rate zero is the identity in both modes") {
        Dropout<double> drop(0.0);
        const Tensor<double> y = drop.forward(x, true, &rng);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.flat()[i] == x.flat()[i]);
    }
    SUBCASE("training mean stays near one on an all-ones tensor") {
        Dropout<double> drop(0.2);
        Tensor<double> ones({1000});
        ones.fill(1.0);
        double sum = 0.0;
        for (int copy = 0; copy < 100; ++copy) { // 10^5 masked samples
            const Tensor<double> y = drop.forward(ones, true, &rng);
            for (double v : y.flat()) sum += v;
        }
        const double mean = sum / 1e5;
        CHECK(mean > 0.99);
        CHECK(mean < 1.01);
    }
    SUBCASE("backward reuses the forward mask") {
        Dropout<double> drop(0.5);
        const Tensor<double> y = drop.forward(x, true, &rng);
        Tensor<double> dy(x.shape());
        dy.fill(1.0);
        const Tensor<double> dx = drop.backward(dy);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y.flat()[i] == 0.0) {
                CHECK(dx.flat()[i] == 0.0);
            } else {
                CHECK(dx.flat()[i] == doctest::Approx(2.0)); // 1/(1-0.5)
            }
        }
    }
    SUBCASE("rate outside [0,1) is rejected") {
        CHECK_THROWS_AS(Dropout<double>(1.0), std::invalid_argument);
        CHECK_THROWS_AS(Dropout<double>(-0.1), std::invalid_argument);
    }
}

TEST_CASE("dense softmax probabilities") {
    SUBCASE("equal logits give the uniform distribution") {
        DenseSoftmax<double> dense(3, 4);
        Tensor<double> x({3});
        x.fill(0.7); // weights are zero, so logits = bias = 0
        const Tensor<double> p = dense.forward(x);
        for (std::size_t c = 0; c < 4; ++c) CHECK(p(c) == doctest::Approx(0.25));
    }
    SUBCASE("logits [1, 2] give the textbook sigmoid split") {
        DenseSoftmax<double> dense(1, 2);
        dense.weight().value(0, 0) = 1.0;
        dense.weight().value(0, 1) = 2.0;
        Tensor<double> x({1});
        x(0) = 1.0;
        const Tensor<double> p = dense.forward(x);
        CHECK(p(0) == doctest::Approx(0.26894).epsilon(1e-4));
        CHECK(p(1) == doctest::Approx(0.73106).epsilon(1e-4));
    }
    SUBCASE("rows sum to one, entries in (0,1), shift invariance") {
        Rng rng(60);
        DenseSoftmax<double> dense(8, 5);
        dense.initialize(rng);
        const Tensor<double> x = random_tensor({8}, rng);
        const Tensor<double> p = dense.forward(x);
        double sum = 0.0;
        for (std::size_t c = 0; c < 5; ++c) {
            CHECK(p(c) > 0.0);
            CHECK(p(c) < 1.0);
            sum += p(c);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

        // adding a constant to all logits (via the bias) leaves probs unchanged
        Tensor<double> before = p;
        for (std::size_t c = 0; c < 5; ++c) dense.bias().value(c) += 3.25;
        const Tensor<double> shifted = dense.forward(x);
        for (std::size_t c = 0; c < 5; ++c) {
            CHECK(shifted(c) == doctest::Approx(before(c)).epsilon(1e-6));
        }
    }
}

TEST_CASE("dense softmax rejects non-finite logits") {
    DenseSoftmax<double> dense(2, 3);
    dense.weight().value(0, 0) = std::numeric_limits<double>::infinity();
    Tensor<double> x({2});
    x(0) = 1.0;
    x(1) = 1.0;
    CHECK_THROWS_AS((void)dense.forward(x), std::runtime_error);
}

TEST_CASE("cross entropy values") {
    Tensor<double> one_hot({3});
    one_hot(1) = 1.0;
    CHECK(cross_entropy(one_hot, 1) == doctest::Approx(0.0));

    Tensor<double> uniform({5});
    uniform.fill(0.2);
    CHECK(cross_entropy(uniform, 3) == doctest::Approx(std::log(5.0)));

    CHECK_THROWS_AS((void)cross_entropy(uniform, 5), std::invalid_argument);
}

TEST_CASE("softmax cross-entropy logit gradient is probs minus one-hot, FD-verified") {
    Rng rng(61);
    DenseSoftmax<double> dense(6, 4);
    dense.initialize(rng);
    Param<double> x("input", {6});
    fill_uniform(x.value, rng, -1.0, 1.0);
    const std::size_t label = 2;

    auto loss = [&] { return cross_entropy(dense.forward(x.value), label); };

    dense.weight().zero_grad();
    dense.bias().zero_grad();
    const Tensor<double> probs = dense.forward(x.value);
    const Tensor<double> dlogits = cross_entropy_softmax_grad(probs, label);
    for (std::size_t c = 0; c < 4; ++c) {
        const double expected = probs(c) - (c == label ? 1.0 : 0.0);
        CHECK(dlogits(c) == doctest::Approx(expected));
    }
    x.grad = dense.backward(dlogits);

    std::vector<Param<double>*> params = {&dense.weight(), &dense.bias(), &x};
    const auto report = check_gradients(params, loss, 1e-5);
    CHECK(report.max_rel_error < 1e-6);
}
