#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dglab/netcore.hpp"
#include "test_support.hpp"

using namespace dglab;
using dglab::testing::finite_difference;
using dglab::testing::max_relative_error;
using dglab::testing::random_matrix;

TEST(Tensor, RejectsShapeMismatch) {
    EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), NumericError);
    Tensor t({2, 3}, std::vector<double>(6, 1.0));
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
}

TEST(MlpInit, ShapesAndZeroBiases) {
    const MlpSpec spec{{2, 3}};
    const ParamSet p = mlp_init(spec, 7);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0].name, "W0");
    EXPECT_EQ(p[0].value.shape(), (std::vector<std::size_t>{2, 3}));
    EXPECT_EQ(p[1].value.shape(), (std::vector<std::size_t>{3}));
    for (double b : p[1].value.values()) EXPECT_EQ(b, 0.0);
}

TEST(MlpInit, Deterministic) {
    const MlpSpec spec{{2, 3}};
    EXPECT_EQ(mlp_init(spec, 7).flat_values(), mlp_init(spec, 7).flat_values());
    EXPECT_NE(mlp_init(spec, 7).flat_values(), mlp_init(spec, 8).flat_values());
}

TEST(MlpInit, WeightsWithinFanInBound) {
    const MlpSpec spec{{4, 8, 3}, Activation::relu, 1.0};
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; checked < 10000; ++seed) {
        const ParamSet p = mlp_init(spec, seed);
        for (std::size_t l = 0; l < 2; ++l) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(spec.layer_sizes[l]));
            for (double w : p[2 * l].value.values()) {
                ASSERT_LE(std::abs(w), bound);
                ++checked;
            }
        }
    }
}

TEST(MlpInit, InvalidSpecs) {
    EXPECT_THROW(mlp_init(MlpSpec{{3}}, 0), ConfigError);
    EXPECT_THROW(mlp_init(MlpSpec{{}}, 0), ConfigError);
    EXPECT_THROW(mlp_init(MlpSpec{{3, 0}}, 0), ConfigError);
}

TEST(Forward, ZeroNetGivesZeroLogits) {
    const MlpSpec spec{{3, 4, 2}};
    ParamSet p = mlp_init(spec, 1);
    for (auto& prm : p) prm.value.fill(0.0);
    const auto trace = forward(p, spec, random_matrix(5, 3, 1));
    for (double v : trace.logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, IdentityLayer) {
    const MlpSpec spec{{2, 2}};
    ParamSet p = mlp_init(spec, 1);
    p[0].value = Tensor::from_rows({{1, 0}, {0, 1}});
    const auto trace = forward(p, spec, Tensor::from_rows({{1, 2}}));
    EXPECT_EQ(trace.logits, Tensor::from_rows({{1, 2}}));
}

TEST(Forward, ReluOnOutputHandComputed) {
    const MlpSpec spec{{2, 2}, Activation::relu, 1.0, true};
    ParamSet p = mlp_init(spec, 1);
    p[0].value = Tensor::from_rows({{1, 0}, {0, 1}});
    p[1].value = Tensor({2}, std::vector<double>{1, 1});
    const auto trace = forward(p, spec, Tensor::from_rows({{-3, 2}}));
    EXPECT_EQ(trace.pre[0], Tensor::from_rows({{-2, 3}}));
    EXPECT_EQ(trace.logits, Tensor::from_rows({{0, 3}}));
}

TEST(Forward, DimensionMismatch) {
    const MlpSpec spec{{3, 2}};
    const ParamSet p = mlp_init(spec, 1);
    EXPECT_THROW(forward(p, spec, random_matrix(2, 4, 0)), NumericError);
}

TEST(Backward, ZeroUpstreamGradient) {
    const MlpSpec spec{{3, 4, 2}, Activation::tanh};
    ParamSet p = mlp_init(spec, 3);
    const auto trace = forward(p, spec, random_matrix(4, 3, 2));
    const Tensor dx = backward(p, spec, trace, Tensor::matrix(4, 2));
    for (double v : dx.values()) EXPECT_EQ(v, 0.0);
    for (double g : p.flat_grads()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, ShapeMismatch) {
    const MlpSpec spec{{3, 2}};
    ParamSet p = mlp_init(spec, 3);
    const auto trace = forward(p, spec, random_matrix(4, 3, 2));
    EXPECT_THROW(backward(p, spec, trace, Tensor::matrix(4, 3)), NumericError);
}

TEST(Backward, LinearClosedForm) {
    // loss = sum(logits) for logits = x W + b: dW = x^T 1, db = 1^T 1, dx = 1 W^T.
    const MlpSpec spec{{3, 2}, Activation::identity};
    ParamSet p = mlp_init(spec, 4);
    const Tensor x = random_matrix(5, 3, 9);
    const auto trace = forward(p, spec, x);
    const Tensor dx = backward(p, spec, trace, Tensor({5, 2}, 1.0));
    for (std::size_t i = 0; i < 3; ++i) {
        double col_sum = 0.0;
        for (std::size_t n = 0; n < 5; ++n) col_sum += x.at(n, i);
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(p[0].grad.at(i, j), col_sum, 1e-12);
    }
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(p[1].grad[j], 5.0);
    for (std::size_t n = 0; n < 5; ++n)
        for (std::size_t i = 0; i < 3; ++i)
            EXPECT_NEAR(dx.at(n, i), p[0].value.at(i, 0) + p[0].value.at(i, 1), 1e-12);
}

TEST(Backward, MatchesFiniteDifferences) {
    for (Activation act : {Activation::tanh, Activation::relu}) {
        const MlpSpec spec{{3, 4, 2}, act};
        ParamSet p = mlp_init(spec, 21);
        const Tensor x = random_matrix(6, 3, 5);
        const std::vector<int> y{0, 1, 1, 0, 1, 0};
        auto loss = [&](const ParamSet& q) { return softmax_cross_entropy(forward(q, spec, x).logits, y).loss; };
        p.zero_grad();
        const auto trace = forward(p, spec, x);
        backward(p, spec, trace, softmax_cross_entropy(trace.logits, y).grad);
        EXPECT_LT(max_relative_error(p.flat_grads(), finite_difference(p, loss)), 1e-4) << to_string(act);
    }
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
    const MlpSpec spec{{3, 5, 2}, Activation::tanh};
    ParamSet p = mlp_init(spec, 2);
    Tensor x = random_matrix(2, 3, 8);
    const std::vector<int> y{1, 0};
    const auto trace = forward(p, spec, x);
    const Tensor dx = backward(p, spec, trace, softmax_cross_entropy(trace.logits, y).grad);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + 1e-5;
        const double up = softmax_cross_entropy(forward(p, spec, x).logits, y).loss;
        x[i] = saved - 1e-5;
        const double down = softmax_cross_entropy(forward(p, spec, x).logits, y).loss;
        x[i] = saved;
        EXPECT_LT(dglab::testing::relative_error(dx[i], (up - down) / 2e-5), 1e-4);
    }
}

TEST(Backward, GradientsAccumulate) {
    const MlpSpec spec{{3, 4, 2}, Activation::tanh};
    ParamSet p = mlp_init(spec, 5);
    const Tensor x1 = random_matrix(3, 3, 1), x2 = random_matrix(3, 3, 2);
    const Tensor g1 = random_matrix(3, 2, 3), g2 = random_matrix(3, 2, 4);

    ParamSet a = p, b = p, both = p;
    backward(a, spec, forward(a, spec, x1), g1);
    backward(b, spec, forward(b, spec, x2), g2);
    backward(both, spec, forward(both, spec, x1), g1);
    backward(both, spec, forward(both, spec, x2), g2);
    const auto ga = a.flat_grads(), gb = b.flat_grads(), gsum = both.flat_grads();
    for (std::size_t i = 0; i < gsum.size(); ++i) EXPECT_NEAR(gsum[i], ga[i] + gb[i], 1e-12);
}

TEST(CrossEntropy, UniformLogits) {
    const auto r = softmax_cross_entropy(Tensor::matrix(3, 4), std::vector<int>{0, 1, 3});
    EXPECT_NEAR(r.loss, std::log(4.0), 1e-12);
}

TEST(CrossEntropy, LargeLogitStaysFinite) {
    const auto r = softmax_cross_entropy(Tensor::from_rows({{1000, 0, 0}}), std::vector<int>{0});
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_NEAR(r.loss, 0.0, 1e-12);
    EXPECT_TRUE(r.grad.all_finite());
}

TEST(CrossEntropy, HandComputedTwoClass) {
    // logits [1, 2]: -log softmax_0 = ln(1 + e), -log softmax_1 = ln(1 + e) - 1.
    const Tensor logits = Tensor::from_rows({{1, 2}});
    EXPECT_NEAR(softmax_cross_entropy(logits, std::vector<int>{0}).loss, 1.3132616875182228, 1e-12);
    EXPECT_NEAR(softmax_cross_entropy(logits, std::vector<int>{1}).loss, 0.3132616875182228, 1e-12);
}

TEST(CrossEntropy, GradientIsSoftmaxMinusOneHotOverBatch) {
    const Tensor logits = Tensor::from_rows({{0.5, -1.0}, {2.0, 0.0}});
    const auto r = softmax_cross_entropy(logits, std::vector<int>{1, 0});
    const double p00 = std::exp(0.5) / (std::exp(0.5) + std::exp(-1.0));
    EXPECT_NEAR(r.grad.at(0, 0), p00 / 2, 1e-12);
    EXPECT_NEAR(r.grad.at(0, 1), (1 - p00 - 1) / 2, 1e-12);
}

TEST(CrossEntropy, LabelOutOfRange) {
    EXPECT_THROW(softmax_cross_entropy(Tensor::matrix(1, 2), std::vector<int>{2}), NumericError);
    EXPECT_THROW(softmax_cross_entropy(Tensor::matrix(1, 2), std::vector<int>{-1}), NumericError);
}

TEST(Mse, Values) {
    const Tensor x({2}, std::vector<double>{0, 2});
    EXPECT_EQ(mse_loss(x, x).loss, 0.0);
    EXPECT_DOUBLE_EQ(mse_loss(x, Tensor({2})).loss, 2.0);
    EXPECT_THROW(mse_loss(x, Tensor({3})), NumericError);
}

TEST(Mse, GradientMatchesFiniteDifferences) {
    Tensor x = random_matrix(3, 4, 1);
    const Tensor t = random_matrix(3, 4, 2);
    const Tensor g = mse_loss(x, t).grad;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + 1e-5;
        const double up = mse_loss(x, t).loss;
        x[i] = saved - 1e-5;
        const double down = mse_loss(x, t).loss;
        x[i] = saved;
        EXPECT_LT(dglab::testing::relative_error(g[i], (up - down) / 2e-5), 1e-6);
    }
}

TEST(Argmax, TiesGoLow) {
    EXPECT_EQ(argmax_rows(Tensor::from_rows({{0.2, 0.9}})), std::vector<int>{1});
    EXPECT_EQ(argmax_rows(Tensor::from_rows({{0.5, 0.5}})), std::vector<int>{0});
    EXPECT_EQ(argmax_rows(Tensor::matrix(7, 3)).size(), 7u);
}

namespace {
ParamSet scalar_param(double value, double grad) {
    ParamSet p;
    p.add("theta", Tensor({1}, std::vector<double>{value}));
    p[0].grad[0] = grad;
    return p;
}
}  // namespace

TEST(Optimizer, ZeroGradientLeavesParameters) {
    for (auto kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
        ParamSet p = scalar_param(1.5, 0.0);
        Optimizer opt({kind, 0.1});
        opt.step(p);
        EXPECT_EQ(p[0].value[0], 1.5);
    }
}

TEST(Optimizer, SgdHandValue) {
    ParamSet p = scalar_param(1.0, 2.0);
    Optimizer opt({OptimizerKind::sgd, 0.1, 0.0});
    opt.step(p);
    EXPECT_NEAR(p[0].value[0], 0.8, 1e-15);
}

TEST(Optimizer, SgdMomentumAccumulates) {
    ParamSet p = scalar_param(0.0, 1.0);
    Optimizer opt({OptimizerKind::sgd, 1.0, 0.5});
    opt.step(p);  // m = 1
    opt.step(p);  // m = 1.5
    EXPECT_DOUBLE_EQ(p[0].value[0], -2.5);
}

TEST(Optimizer, AdamFirstStep) {
    // m = 0.1, v = 0.001; bias-corrected both are 1, so the step is lr / (1 + eps).
    ParamSet p = scalar_param(1.0, 1.0);
    Optimizer opt({OptimizerKind::adam, 0.001});
    opt.step(p);
    const double m_hat = (0.1 * 1.0) / (1.0 - 0.9);
    const double v_hat = (0.001 * 1.0) / (1.0 - 0.999);
    EXPECT_NEAR(p[0].value[0], 1.0 - 0.001 * m_hat / (std::sqrt(v_hat) + 1e-8), 1e-15);
    EXPECT_NEAR(1.0 - p[0].value[0], 0.001, 1e-10);
}

TEST(Optimizer, NanGradientNamesParameter) {
    ParamSet p = scalar_param(1.0, std::nan(""));
    Optimizer opt({OptimizerKind::sgd, 0.1});
    try {
        opt.step(p);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("theta"), std::string::npos);
    }
}

TEST(Optimizer, FrozenParametersStay) {
    ParamSet p = scalar_param(1.0, 3.0);
    p[0].trainable = false;
    Optimizer opt({OptimizerKind::adam, 0.1});
    opt.step(p);
    EXPECT_EQ(p[0].value[0], 1.0);
}
