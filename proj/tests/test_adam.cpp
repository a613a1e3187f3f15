#include <doctest.h>

#include <cmath>
#include <vector>

#include "techtexc/adam.hpp"
#include "techtexc/rng.hpp"

using namespace techtexc;

TEST_CASE("zero gradient leaves parameters unchanged at every timestep") {
    Rng rng(1);
    Param<double> p("p", {7});
    fill_uniform(p.value, rng, -2.0, 2.0);
    const std::vector<double> before(p.value.flat().begin(), p.value.flat().end());

    Param<double>* ptr = &p;
    AdamState<double> adam({&ptr, 1});
    for (int step = 0; step < 5; ++step) {
        p.zero_grad();
        adam.step({&ptr, 1});
    }
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(p.value(i) == before[i]);
    }
}

TEST_CASE("first step moves each coordinate by about lr, against the gradient") {
    // at t=1 the bias corrections give m_hat = g and v_hat = g^2, so the
    // update is lr * g / (|g| + eps)
    Rng rng(2);
    Param<double> p("p", {5});
    fill_uniform(p.value, rng, -1.0, 1.0);
    fill_uniform(p.grad, rng, -3.0, 3.0);
    const std::vector<double> before(p.value.flat().begin(), p.value.flat().end());
    const std::vector<double> grad(p.grad.flat().begin(), p.grad.flat().end());

    Param<double>* ptr = &p;
    AdamState<double> adam({&ptr, 1}, 0.001);
    adam.step({&ptr, 1});

    for (std::size_t i = 0; i < 5; ++i) {
        const double delta = p.value(i) - before[i];
        const double expected = -0.001 * grad[i] / (std::abs(grad[i]) + 1e-8);
        CHECK(delta == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(delta) == doctest::Approx(0.001).epsilon(1e-4));
    }
}

TEST_CASE("agrees with a scalar reference loop over ten steps") {
    Rng rng(3);
    Param<double> p("p", {5});
    fill_uniform(p.value, rng, -1.0, 1.0);

    // reference state
    std::vector<double> theta(p.value.flat().begin(), p.value.flat().end());
    std::vector<double> m(5, 0.0), v(5, 0.0);
    const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8;

    Param<double>* ptr = &p;
    AdamState<double> adam({&ptr, 1}, lr, b1, b2, eps);

    Rng grad_rng(4);
    for (int t = 1; t <= 10; ++t) {
        std::vector<double> g(5);
        for (auto& gi : g) gi = grad_rng.uniform(-1.0, 1.0);

        for (std::size_t i = 0; i < 5; ++i) p.grad(i) = g[i];
        adam.step({&ptr, 1});

        for (std::size_t i = 0; i < 5; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            const double m_hat = m[i] / (1 - std::pow(b1, t));
            const double v_hat = v[i] / (1 - std::pow(b2, t));
            theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(p.value(i) == doctest::Approx(theta[i]).epsilon(1e-7));
    }
    CHECK(adam.timestep() == 10);
}

TEST_CASE("non-finite gradient aborts with the parameter name") {
    Param<double> p("conv.weight", {3});
    p.grad(1) = std::numeric_limits<double>::quiet_NaN();
    Param<double>* ptr = &p;
    AdamState<double> adam({&ptr, 1});
    CHECK_THROWS_WITH_AS(adam.step({&ptr, 1}), doctest::Contains("conv.weight"),
                         std::runtime_error);
}
