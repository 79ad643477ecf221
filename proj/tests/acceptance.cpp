// Acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dglab/benchmark.hpp"
#include "dglab/experiment.hpp"
#include "gradient_suite.hpp"
#include "test_support.hpp"

using namespace dglab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

char buf[512];

template <typename... A>
std::string format(const char* f, A... a) {
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Batch> blob_batches(std::size_t n, std::uint64_t seed) {
    BuiltinParams p;
    p.n_per_domain = 40;
    const Task t = builtin_task(BuiltinKind::spurious_blobs, p, seed);
    std::vector<Batch> out;
    for (std::size_t d = 0; d < t.train_domain_count(); ++d) {
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        out.push_back(make_batch(full_view(t.train_data(d), static_cast<int>(d)), rows));
    }
    return out;
}

ModelConfig blob_model(std::vector<ModelKind> parts) {
    ModelConfig c;
    c.parts = std::move(parts);
    c.input_dim = 3;
    c.num_domains = 3;
    c.net_widths = {4};
    c.feature_dim = 3;
    c.gamma_y = 2.0;
    c.gamma_d = 1.0;
    c.zx_dim = 1;
    c.zy_dim = 2;
    c.zd_dim = 1;
    return c;
}

// ---------------------------------------------------------------- AC1

Verdict ac1() {
    const auto start = std::chrono::steady_clock::now();
    const auto cases = dglab::testing::gradient_suite();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double worst = 0.0;
    std::size_t max_params = 0;
    std::string worst_name;
    for (const auto& c : cases) {
        if (c.max_rel_error >= worst) worst = c.max_rel_error, worst_name = c.name;
        max_params = std::max(max_params, c.n_params);
    }
    const bool pass = cases.size() == 12 && worst < 1e-4 && max_params <= 50 && secs < 30.0;
    return {pass, format("gradient suite: %zu cases, max rel err %.2e (%s) < 1e-4, <= %zu params, %.2f s < 30 s",
                         cases.size(), worst, worst_name.c_str(), max_params, secs)};
}

// ---------------------------------------------------------------- AC2

Verdict ac2() {
    Rng rng(2);
    const ModelKind kinds[] = {ModelKind::erm, ModelKind::dann, ModelKind::diva};
    const TrainerKind tkinds[] = {TrainerKind::dial, TrainerKind::mldg, TrainerKind::fishr};
    double worst = 0.0;
    std::size_t terms = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ModelConfig> members;
        const std::size_t n_members = 1 + rng.below(3);
        for (std::size_t i = 0; i < n_members; ++i) {
            ModelConfig m = blob_model({kinds[rng.below(3)]});
            m.gamma_reg = rng.uniform(0.0, 5.0);
            m.gamma_y = std::exp(rng.uniform(0.0, std::log(1e6)));
            m.gamma_d = rng.uniform(0.0, 1e5);
            members.push_back(m);
        }
        TrainerConfig tc;
        const std::size_t depth = rng.below(4);
        if (depth > 0) tc.chain.clear();
        for (std::size_t i = 0; i < depth; ++i) tc.chain.push_back({tkinds[rng.below(3)], rng.uniform(0.0, 3.0)});
        Model model = Model::build(compose_models(members), rng());
        Trainer trainer(tc);
        Optimizer opt({OptimizerKind::adam, 1e-3});
        for (int step = 0; step < 2; ++step) {
            const LossReport r = trainer.step(model, blob_batches(4, static_cast<std::uint64_t>(trial)), opt).loss;
            double srm = r.task_loss;
            for (const auto& t : r.reg_terms) srm += t.multiplier * t.value;
            worst = std::max(worst, std::abs(r.total - srm) / std::max(1.0, std::abs(srm)));
            terms += r.reg_terms.size();
        }
    }
    return {worst <= 1e-12, format("SRM additivity: 100 random compositions x chains, %zu reg terms, max deviation %.1e <= 1e-12",
                                   terms, worst)};
}

// ---------------------------------------------------------------- AC3

double max_shared_diff(const ParamSet& a, const ParamSet& b, std::size_t shared) {
    const auto va = a.flat_values(), vb = b.flat_values();
    double d = 0.0;
    for (std::size_t i = 0; i < shared; ++i) d = std::max(d, std::abs(va[i] - vb[i]));
    return d;
}

double trajectory_gap(Model a, Trainer ta, Model b, Trainer tb, OptimizerKind opt_kind, std::size_t shared) {
    Optimizer oa({opt_kind, 0.05}), ob({opt_kind, 0.05});
    double gap = 0.0;
    for (std::uint64_t step = 0; step < 20; ++step) {
        const auto batches = blob_batches(6, 100 + step);
        ta.step(a, batches, oa);
        tb.step(b, batches, ob);
        gap = std::max(gap, max_shared_diff(a.params(), b.params(), shared));
    }
    return gap;
}

Verdict ac3() {
    double worst = 0.0;
    for (OptimizerKind k : {OptimizerKind::sgd, OptimizerKind::adam}) {
        const Model dann = Model::build(blob_model({ModelKind::dann}), 4);
        const std::size_t all = dann.params().scalar_count();
        worst = std::max(worst, trajectory_gap(dann, Trainer{}, dann,
                                               Trainer(decorate({TrainerKind::dial, 0.0}, TrainerConfig{})), k, all));
        TrainerConfig mldg;
        mldg.chain = {{TrainerKind::mldg, 0.5}};
        worst = std::max(worst, trajectory_gap(dann, Trainer(mldg), dann,
                                               Trainer(decorate({TrainerKind::fishr, 0.0}, mldg)), k, all));
        // A dann member with zero weight against plain ERM on the shared parameters.
        ModelConfig zero = blob_model({ModelKind::dann});
        zero.gamma_reg = 0.0;
        const Model erm = Model::build(blob_model({ModelKind::erm}), 4);
        worst = std::max(worst, trajectory_gap(erm, Trainer{}, Model::build(zero, 4), Trainer{}, k,
                                               erm.params().scalar_count()));
    }
    return {worst <= 1e-12,
            format("neutral decoration/composition: dial/fishr at gamma 0 and dann at gamma 0 vs erm, 20 steps, "
                   "sgd+adam, max param gap %.1e <= 1e-12",
                   worst)};
}

// ---------------------------------------------------------------- AC4

double spurious_rule_accuracy(const DomainDataset& d) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < d.size(); ++i) hit += (d.features.at(i, 2) > 0.0) == (d.labels[i] == 1);
    return static_cast<double>(hit) / static_cast<double>(d.size());
}

Verdict ac4() {
    const auto start = std::chrono::steady_clock::now();
    // Oracle: the spurious-only rule is near perfect in training and inverted at test.
    const Task task = builtin_task(BuiltinKind::spurious_blobs, {}, 0);
    double rule_train = 0.0;
    for (std::size_t d = 0; d < task.train_domain_count(); ++d)
        rule_train += spurious_rule_accuracy(task.train_data(d)) / static_cast<double>(task.train_domain_count());
    const double rule_test = spurious_rule_accuracy(task.test_data("env3"));

    auto run = [](const std::string& model, double gamma, int seed) {
        const std::string yaml = format(
            "{task: spurious_blobs, model: %s, gamma_reg: %g, net_widths: [], feature_dim: 2, lr: 0.01, epos: 30, "
            "bs: 32, seed: %d}",
            model.c_str(), gamma, seed);
        return run_experiment(parse_experiment_config(YAML::Load(yaml)));
    };
    std::vector<double> erm_test, erm_val;
    for (int s = 0; s < 5; ++s) {
        const RunResult r = run("erm", 0.0, s);
        erm_test.push_back(r.test_accuracy[0].accuracy);
        erm_val.push_back(r.val_accuracy);
    }
    double best_gamma = 0.0, best_dann = -1.0;
    for (double g : {0.1, 1.0, 10.0}) {
        std::vector<double> acc;
        for (int s = 0; s < 5; ++s) acc.push_back(run("dann", g, s).test_accuracy[0].accuracy);
        if (median(acc) > best_dann) best_dann = median(acc), best_gamma = g;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double erm_med = median(erm_test), val_med = median(erm_val);
    const bool pass = rule_train >= 0.95 && rule_test <= 0.05 && erm_med <= 0.35 && val_med >= 0.95 &&
                      best_dann - erm_med >= 0.15 && secs < 180.0;
    return {pass, format("spurious blobs: rule train %.3f test %.3f; erm median test %.3f <= 0.35, val %.3f >= 0.95; "
                         "dann (gamma %g) median test %.3f, gain %.3f >= 0.15; %.1f s < 180 s",
                         rule_train, rule_test, erm_med, val_med, best_gamma, best_dann, best_dann - erm_med, secs)};
}

// ---------------------------------------------------------------- AC5

Verdict ac5() {
    ParamDistribution lu;
    lu.name = "lr";
    lu.kind = DistKind::loguniform;
    lu.lo = 1e-4;
    lu.hi = 1.0;
    ParamDistribution u;
    u.name = "gamma_reg";
    u.lo = 0.0;
    u.hi = 10.0;
    u.step = 0.1;
    const auto a = sample_params({lu, u}, 10000, 77), b = sample_params({lu, u}, 10000, 77);
    const bool identical = a == b;

    std::vector<double> logs;
    bool bounded = true;
    for (const auto& m : a) {
        const double v = std::get<double>(*find_param(m, "lr"));
        const double g = std::get<double>(*find_param(m, "gamma_reg"));
        bounded &= v >= lu.lo && v <= lu.hi && g >= 0.0 && g <= 10.0;
        logs.push_back((std::log(v) - std::log(lu.lo)) / (std::log(lu.hi) - std::log(lu.lo)));
    }
    std::sort(logs.begin(), logs.end());
    double ks = 0.0;
    const double n = static_cast<double>(logs.size());
    for (std::size_t i = 0; i < logs.size(); ++i)
        ks = std::max({ks, static_cast<double>(i + 1) / n - logs[i], logs[i] - static_cast<double>(i) / n});

    ParamDistribution g1;
    g1.name = "bs";
    g1.kind = DistKind::grid_list;
    g1.values = {8.0, 16.0, 32.0};
    ParamDistribution g2 = u;
    g2.num = 4;
    ParamDistribution g3;
    g3.name = "activation";
    g3.kind = DistKind::grid_list;
    g3.values = {std::string("relu"), std::string("tanh")};
    const std::size_t grid = grid_params({g1, g2, g3}).size();

    const bool pass = identical && bounded && ks < 0.05 && grid == 3 * 4 * 2;
    return {pass, format("sampler: resample identical=%s, bounds ok=%s, KS %.4f < 0.05 at n=10000, grid %zu == 24",
                         identical ? "yes" : "no", bounded ? "yes" : "no", ks, grid)};
}

// ---------------------------------------------------------------- AC6

Verdict ac6() {
    const BenchmarkConfig cfg = parse_benchmark_config(YAML::Load(R"(
shared:
  pool_size: 8
  params:
    gamma_y: {kind: loguniform, lo: 100000, hi: 50000000, step: 1000}
methods:
  diva:
    model: diva
    shared: [gamma_y]
    hyperparams:
      gamma_d: {kind: loguniform, lo: 100000, hi: 50000000, step: 1000}
      zx_dim: {kind: categorical, values: [0, 32, 64, 96]}
  dann_diva:
    model: dann_diva
    shared: [gamma_y]
    hyperparams:
      gamma_d: {kind: loguniform, lo: 100000, hi: 50000000, step: 1000}
      zx_dim: {kind: categorical, values: [0, 32, 64, 96]}
sampling: {n_param_samples: 8}
)"));
    const auto sets = method_param_sets(cfg);
    std::size_t equal_shared = 0, equal_private = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        equal_shared += *find_param(sets[0][i], "gamma_y") == *find_param(sets[1][i], "gamma_y");
        equal_private += *find_param(sets[0][i], "gamma_d") == *find_param(sets[1][i], "gamma_d");
    }
    return {equal_shared == 8 && equal_private < 8,
            format("shared pool: gamma_y identical at %zu/8 indices across two methods; private gamma_d equal at %zu/8",
                   equal_shared, equal_private)};
}

// ---------------------------------------------------------------- AC7

const char* kBench = R"(
common:
  task: spurious_blobs
  te_d: [env3]
  epos: 5
  bs: 32
  net_widths: [8]
shared:
  pool_size: 2
  params:
    lr: {kind: loguniform, lo: 0.001, hi: 0.05}
methods:
  erm: {shared: [lr]}
  dann:
    shared: [lr]
    hyperparams:
      gamma_reg: {kind: uniform, lo: 0.1, hi: 10, step: 0.1}
sampling: {n_param_samples: 2, n_seeds: 2}
)";

Verdict ac7() {
    const auto start = std::chrono::steady_clock::now();
    const fs::path dir = dglab::testing::temp_dir("acceptance_bench");
    const BenchmarkConfig cfg = parse_benchmark_config(YAML::Load(kBench));
    auto jobs = enumerate_jobs(cfg);
    const ExecutionReport first = execute_local(jobs, dir, {4, false, nullptr});
    const ResultTable table = aggregate(dir);
    const auto charts = render_charts(table, dir / "charts");
    std::size_t scatters = 0;
    for (const auto& c : charts) scatters += c.filename().string().rfind("scatter_", 0) == 0;
    const bool has_dist = !charts.empty() && charts[0].filename() == "accuracy_distribution.svg";
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const int first_code = benchmark_exit_code(first.rows);

    const ExecutionReport rerun = execute_local(jobs, dir, {4, false, nullptr});

    const fs::path bad_dir = dglab::testing::temp_dir("acceptance_bench_fail");
    jobs[5].config["model"] = "frobnicate";
    const ExecutionReport broken = execute_local(jobs, bad_dir, {4, false, nullptr});
    std::size_t ok = 0;
    for (const auto& r : broken.rows) ok += r.status == RunStatus::ok;
    const int broken_code = benchmark_exit_code(broken.rows);

    const bool pass = jobs.size() == 8 && first_code == 0 && table.rows.size() == 8 && has_dist && scatters >= 1 &&
                      rerun.skipped == 8 && ok == 7 && broken.failed == 1 && broken_code == 3 && secs < 300.0;
    return {pass, format("benchmark: %zu jobs on 4 workers in %.1f s < 300 s, exit %d, %zu table rows, distribution "
                         "chart %s + %zu scatters; rerun skipped %zu/8; injected failure %zu ok + %zu failed, exit %d",
                         jobs.size(), secs, first_code, table.rows.size(), has_dist ? "yes" : "no", scatters,
                         rerun.skipped, ok, broken.failed, broken_code)};
}

// ---------------------------------------------------------------- AC8

Verdict ac8() {
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = run_experiment(parse_experiment_config(YAML::Load(R"(
te_d: env3
task: spurious_blobs
bs: 2
model: dann_diva
epos: 1
trainer: mldg_dial
gamma_y: 700000.0
gamma_d: 100000.0
)")));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool finite = std::isfinite(r.history.at(0).mean_loss.total);
    return {r.epochs_run == 1 && finite && secs < 10.0,
            format("example config (bs 2, epos 1, dann_diva, mldg_dial, gamma_y 700000, gamma_d 100000): "
                   "%zu epoch, test acc %.3f, %.2f s < 10 s",
                   r.epochs_run, r.test_accuracy.at(0).accuracy, secs)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
        {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
    int failed = 0;
    for (const auto& [id, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s %s\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
