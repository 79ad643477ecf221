#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dglab/models.hpp"
#include "dglab/tasks.hpp"
#include "test_support.hpp"

using namespace dglab;
using dglab::testing::finite_difference;
using dglab::testing::max_relative_error;

namespace {

// Two training domains (rot0, rot30), two inputs.
const Task& moons() {
    static const Task t = [] {
        BuiltinParams p;
        p.n_per_domain = 40;
        return builtin_task(BuiltinKind::rotated_moons, p, 0);
    }();
    return t;
}

Batch batch_of(int domain, std::size_t n, std::size_t offset = 0) {
    const DatasetView v = full_view(moons().train_data(static_cast<std::size_t>(domain)), domain);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), offset);
    return make_batch(v, rows);
}

ModelConfig small(std::vector<ModelKind> parts) {
    ModelConfig c;
    c.parts = std::move(parts);
    c.input_dim = 2;
    c.num_classes = 2;
    c.num_domains = 2;
    c.net_widths = {3};
    c.feature_dim = 2;
    c.activation = Activation::tanh;
    c.gamma_reg = 0.7;
    c.gamma_y = 5.0;
    c.gamma_d = 2.0;
    c.zx_dim = 1;
    c.zy_dim = 1;
    c.zd_dim = 1;
    return c;
}

std::vector<double> analytic(const Model& m, const Batch& b) {
    ParamSet g = m.params();
    g.zero_grad();
    m.compute(m.params(), b, 1.0, &g);
    return g.flat_grads();
}

std::vector<std::size_t> flat_indices(const ParamSet& p, const std::vector<std::size_t>& params) {
    std::vector<std::size_t> out;
    for (std::size_t k : params)
        for (std::size_t i = 0; i < p[k].value.size(); ++i) out.push_back(p.flat_offset(k) + i);
    return out;
}

}  // namespace

TEST(Models, SmallNetsStayUnderFiftyParameters) {
    for (auto parts : {std::vector{ModelKind::erm}, std::vector{ModelKind::dann}, std::vector{ModelKind::diva}})
        EXPECT_LE(Model::build(small(parts), 1).params().scalar_count(), 50u);
}

TEST(Erm, NoRegularizersAndTotalEqualsTaskLoss) {
    const Model m = Model::build(small({ModelKind::erm}), 1);
    const LossReport r = m.evaluate(m.params(), batch_of(0, 8));
    EXPECT_TRUE(r.reg_terms.empty());
    EXPECT_EQ(r.total, r.task_loss);
}

TEST(Erm, ZeroWeightNetGivesLogClassCount) {
    for (int classes : {2, 3, 5}) {
        ModelConfig c = small({ModelKind::erm});
        c.num_classes = classes;
        Model m = Model::build(c, 1);
        for (auto& p : m.params()) p.value.fill(0.0);
        Batch b = batch_of(0, 6);
        for (std::size_t i = 0; i < b.size(); ++i) b.y[i] = static_cast<int>(i) % classes;
        EXPECT_NEAR(m.evaluate(m.params(), b).task_loss, std::log(static_cast<double>(classes)), 1e-15);
    }
}

TEST(Erm, GradientMatchesFiniteDifferences) {
    const Model m = Model::build(small({ModelKind::erm}), 2);
    const Batch b = batch_of(1, 7);
    const auto numeric = finite_difference(m.params(), [&](const ParamSet& q) { return m.evaluate(q, b).total; });
    EXPECT_LT(max_relative_error(analytic(m, b), numeric), 1e-4);
}

TEST(Erm, DimensionMismatch) {
    const Model m = Model::build(small({ModelKind::erm}), 2);
    Batch b = batch_of(0, 3);
    b.x = Tensor::matrix(3, 5);
    EXPECT_THROW(m.evaluate(m.params(), b), NumericError);
}

TEST(Dann, TotalIsTaskPlusGammaTimesDomainLoss) {
    const Model m = Model::build(small({ModelKind::dann}), 3);
    const LossReport r = m.evaluate(m.params(), batch_of(1, 8));
    ASSERT_EQ(r.reg_names(), std::vector<std::string>{"dann_domain"});
    EXPECT_EQ(r.reg_terms[0].multiplier, 0.7);
    EXPECT_EQ(r.total, r.task_loss + 0.7 * r.reg_terms[0].value);
}

TEST(Dann, GradientReversalMatchesFiniteDifferences) {
    // Extractor: d(l - gamma R); domain head: dR; class head: dl.
    const Model m = Model::build(small({ModelKind::dann}), 4);
    const Batch b = batch_of(0, 6);
    const double gamma = m.config().gamma_reg;
    const auto fd_task =
        finite_difference(m.params(), [&](const ParamSet& q) { return m.evaluate(q, b).task_loss; });
    const auto fd_dom =
        finite_difference(m.params(), [&](const ParamSet& q) { return m.evaluate(q, b).reg_terms[0].value; });
    const auto ext = flat_indices(m.params(), m.extractor_params());
    std::vector<double> expected(fd_task.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const bool in_extractor = std::find(ext.begin(), ext.end(), i) != ext.end();
        expected[i] = fd_task[i] + (in_extractor ? -gamma : 1.0) * fd_dom[i];
    }
    EXPECT_LT(max_relative_error(analytic(m, b), expected), 1e-4);
}

TEST(Dann, ZeroGammaMatchesErmOnSharedParameters) {
    ModelConfig dc = small({ModelKind::dann});
    dc.gamma_reg = 0.0;
    const Model dann = Model::build(dc, 9);
    const Model erm = Model::build(small({ModelKind::erm}), 9);
    const Batch b = batch_of(1, 8);
    const auto gd = analytic(dann, b), ge = analytic(erm, b);
    // Extractor then class head occupy the same leading parameters in both models.
    const std::size_t shared = erm.params().scalar_count();
    for (std::size_t i = 0; i < shared; ++i) {
        ASSERT_EQ(dann.params().flat_values()[i], erm.params().flat_values()[i]);
        EXPECT_EQ(gd[i], ge[i]) << i;
    }
    double dom_norm = 0.0;
    for (std::size_t i = shared; i < gd.size(); ++i) dom_norm += gd[i] * gd[i];
    EXPECT_GT(dom_norm, 0.0);  // the domain head keeps training
}

TEST(Diva, RegisterOrderAndMultipliers) {
    const Model m = Model::build(small({ModelKind::diva}), 5);
    const LossReport r = m.evaluate(m.params(), batch_of(0, 5));
    ASSERT_EQ(r.reg_names(), (std::vector<std::string>{"diva_domain", "diva_recon"}));
    EXPECT_DOUBLE_EQ(r.reg_terms[0].multiplier, 2.0 / 5.0);
    EXPECT_DOUBLE_EQ(r.reg_terms[1].multiplier, 1.0 / 5.0);
}

TEST(Diva, GradientMatchesFiniteDifferences) {
    const Model m = Model::build(small({ModelKind::diva}), 6);
    const Batch b = batch_of(1, 6);
    const auto numeric = finite_difference(m.params(), [&](const ParamSet& q) { return m.evaluate(q, b).total; });
    EXPECT_LT(max_relative_error(analytic(m, b), numeric), 1e-4);
}

TEST(Diva, ZeroZxDimRuns) {
    ModelConfig c = small({ModelKind::diva});
    c.zx_dim = 0;
    const Model m = Model::build(c, 7);
    const Batch b = batch_of(0, 4);
    EXPECT_TRUE(std::isfinite(m.evaluate(m.params(), b).total));
    const auto numeric = finite_difference(m.params(), [&](const ParamSet& q) { return m.evaluate(q, b).total; });
    EXPECT_LT(max_relative_error(analytic(m, b), numeric), 1e-4);
}

TEST(Diva, ConfigErrorsNameTheKey) {
    ModelConfig c = small({ModelKind::diva});
    c.gamma_d.reset();
    try {
        Model::build(c, 0);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "gamma_d");
    }
    c = small({ModelKind::diva});
    c.gamma_y = 0.0;
    EXPECT_THROW(Model::build(c, 0), ConfigError);
}

TEST(Diva, ZeroDomainWeightAndFrozenDecoderFollowsClassPathOnly) {
    // Oracle: plain SGD on class cross-entropy of head(z_y(x)), written out
    // with the raw network primitives.
    ModelConfig c = small({ModelKind::diva});
    c.gamma_d = 0.0;
    c.zx_dim = 1;
    Model m = Model::build(c, 11);
    const auto* diva = dynamic_cast<const DivaPart*>(m.parts().front().get());
    ASSERT_NE(diva, nullptr);
    for (std::size_t i = 0; i < diva->decoder().param_count(); ++i) {
        m.params()[diva->decoder().first_param() + i].value.fill(0.0);
        m.params()[diva->decoder().first_param() + i].trainable = false;
    }
    ParamSet oracle = m.params();
    const double lr = 0.1;
    Optimizer opt({OptimizerKind::sgd, lr, 0.0});
    for (int step = 0; step < 20; ++step) {
        const Batch b = batch_of(step % 2, 8, static_cast<std::size_t>(step));
        m.params().zero_grad();
        m.compute(b);
        opt.step(m.params());

        oracle.zero_grad();
        const ActivationTrace t = m.extractor().forward(oracle, b.x);
        const Tensor zy = t.logits.columns(c.zx_dim, c.zy_dim);
        const ActivationTrace h = diva->class_head().forward(oracle, zy);
        const LossGrad ce = softmax_cross_entropy(h.logits, b.y);
        const Tensor d_zy = diva->class_head().backward(oracle, h, ce.grad, &oracle);
        Tensor d_feat(t.logits.shape());
        d_feat.add_columns(c.zx_dim, d_zy);
        m.extractor().backward(oracle, t, d_feat, &oracle);
        for (std::size_t k = 0; k < diva->class_head().param_count(); ++k) {
            auto& p = oracle[diva->class_head().first_param() + k];
            p.value.add_scaled(p.grad, -lr);
        }
        for (std::size_t k = 0; k < m.extractor().param_count(); ++k) {
            auto& p = oracle[m.extractor().first_param() + k];
            p.value.add_scaled(p.grad, -lr);
        }
    }
    for (std::size_t k = 0; k < diva->class_head().param_count(); ++k) {
        const auto& a = m.params()[diva->class_head().first_param() + k].value;
        const auto& o = oracle[diva->class_head().first_param() + k].value;
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], o[i], 1e-12);
    }
}

TEST(Compose, SingleMemberIsIdentity) {
    const Model a = Model::build(compose_models({small({ModelKind::erm})}), 3);
    const Model b = Model::build(small({ModelKind::erm}), 3);
    const Batch batch = batch_of(0, 6);
    const LossReport ra = a.evaluate(a.params(), batch), rb = b.evaluate(b.params(), batch);
    EXPECT_EQ(ra.total, rb.total);
    EXPECT_EQ(ra.reg_terms, rb.reg_terms);
}

TEST(Compose, DannDivaRegisterOrder) {
    const Model m = Model::build(compose_models({small({ModelKind::dann}), small({ModelKind::diva})}), 3);
    const LossReport r = m.evaluate(m.params(), batch_of(0, 6));
    EXPECT_EQ(r.reg_names(),
              (std::vector<std::string>{"dann_domain", "diva_task", "diva_domain", "diva_recon"}));
    EXPECT_EQ(r.reg_terms[1].multiplier, 1.0);
}

TEST(Compose, TotalIsSumOfMembersOnSharedFeatures) {
    const Model m = Model::build(compose_models({small({ModelKind::dann}), small({ModelKind::diva})}), 8);
    const Batch b = batch_of(1, 7);
    const Tensor feats = m.features(m.params(), b.x);
    double expected = 0.0;
    for (const auto& part : m.parts()) {
        const PartOutput out = part->evaluate(m.params(), feats, b, 1.0, nullptr, nullptr);
        double member = out.task_loss;
        for (const auto& r : out.regs) member += r.multiplier * r.value;
        expected += member;
    }
    EXPECT_NEAR(m.evaluate(m.params(), b).total, expected, 1e-12);
}

TEST(Compose, GradientMatchesFiniteDifferencesWithReversal) {
    const Model m = Model::build(compose_models({small({ModelKind::dann}), small({ModelKind::diva})}), 12);
    const Batch b = batch_of(0, 5);
    const double gamma = m.config().gamma_reg;
    auto dom = [&](const ParamSet& q) { return m.evaluate(q, b).reg_terms[0].value; };
    auto rest = [&](const ParamSet& q) {
        const LossReport r = m.evaluate(q, b);
        return r.total - r.reg_terms[0].multiplier * r.reg_terms[0].value;
    };
    const auto fd_dom = finite_difference(m.params(), dom), fd_rest = finite_difference(m.params(), rest);
    const auto ext = flat_indices(m.params(), m.extractor_params());
    std::vector<double> expected(fd_dom.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const bool in_extractor = std::find(ext.begin(), ext.end(), i) != ext.end();
        expected[i] = fd_rest[i] + (in_extractor ? -gamma : 1.0) * fd_dom[i];
    }
    EXPECT_LT(max_relative_error(analytic(m, b), expected), 1e-4);
}

TEST(Compose, RegisterListIsAssociative) {
    const auto a = small({ModelKind::dann}), b = small({ModelKind::diva}), c = small({ModelKind::erm});
    const Model nested = Model::build(compose_models({a, compose_models({b, c})}), 1);
    const Model flat = Model::build(compose_models({a, b, c}), 1);
    const Batch batch = batch_of(0, 4);
    const auto rn = nested.evaluate(nested.params(), batch).reg_terms;
    const auto rf = flat.evaluate(flat.params(), batch).reg_terms;
    ASSERT_EQ(rn.size(), rf.size());
    for (std::size_t i = 0; i < rn.size(); ++i) {
        EXPECT_EQ(rn[i].name, rf[i].name);
        EXPECT_EQ(rn[i].multiplier, rf[i].multiplier);
    }
}

TEST(Compose, SrmAdditivityIsExact) {
    const Model m = Model::build(compose_models({small({ModelKind::dann}), small({ModelKind::diva})}), 4);
    const LossReport r = m.evaluate(m.params(), batch_of(1, 6));
    double t = r.task_loss;
    for (const auto& term : r.reg_terms) t += term.multiplier * term.value;
    EXPECT_EQ(r.total, t);
    for (const auto& term : r.reg_terms) EXPECT_GE(term.multiplier, 0.0);
}

TEST(Predict, OneLabelPerRowWithLowTieBreak) {
    Model m = Model::build(small({ModelKind::erm}), 1);
    EXPECT_EQ(m.predict(batch_of(0, 9).x).size(), 9u);
    for (auto& p : m.params()) p.value.fill(0.0);
    for (int y : m.predict(batch_of(0, 4).x)) EXPECT_EQ(y, 0);
}
