#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/experiment/config.hpp"
#include "dglab/experiment/observer.hpp"
#include "dglab/experiment/registry.hpp"
#include "dglab/models/model.hpp"
#include "dglab/tasks.hpp"
#include "dglab/trainers.hpp"

namespace dglab {

struct DomainAccuracy {
    std::string domain;
    double accuracy = 0.0;
};

struct RunResult {
    std::string model;
    std::string trainer;
    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;
    std::size_t selected_epoch = 0;
    double val_accuracy = 0.0;
    std::vector<DomainAccuracy> test_accuracy;  // in te_d order
    double wall_time_s = 0.0;
    std::vector<EpochRecord> history;
};

/// A fully assembled experiment. The task is shared so views stay valid when
/// the experiment moves.
struct Experiment {
    ExperimentConfig config;
    std::shared_ptr<const Task> task;
    SplitIndices split;
    Model model;
    Trainer trainer;
    Optimizer optimizer;
    Observer observer;
    std::vector<EpochRecord> history;
    bool trained = false;
};

inline Task load_task(const ExperimentConfig& cfg) {
    const TaskSource& src = cfg.task;
    Task task;
    switch (src.kind) {
        case TaskSource::Kind::builtin:
            task = builtin_task(src.builtin, src.builtin_params, src.task_seed);
            break;
        case TaskSource::Kind::folder:
            if (cfg.te_d.empty()) throw ConfigError("te_d", "te_d is required for folder tasks");
            return task_from_folder(src.root, cfg.te_d, src.val_fraction);
        case TaskSource::Kind::pathfile:
            if (cfg.te_d.empty()) throw ConfigError("te_d", "te_d is required for pathfile tasks");
            return task_from_pathfile(src.index_files, src.base_dir, cfg.te_d, src.num_classes, src.val_fraction);
    }
    if (!cfg.te_d.empty()) task = task.with_test_domains(cfg.te_d);
    return task;
}

/// Model hyperparameters from a run configuration and the task's shape.
inline ModelConfig model_config_for(const ExperimentConfig& cfg, const Task& task) {
    ModelConfig m;
    m.parts = resolve_model(cfg.model);
    m.input_dim = task.feature_dim();
    m.num_classes = task.num_classes();
    m.num_domains = static_cast<int>(task.train_domain_count());
    m.net_widths = cfg.net_widths;
    m.feature_dim = cfg.feature_dim;
    m.head_widths = cfg.head_widths;
    m.net_widths_dom = cfg.net_widths_dom;
    m.activation = cfg.activation;
    m.init_scale = cfg.init_scale;
    m.gamma_reg = cfg.gamma_for("dann");
    m.gamma_y = cfg.gamma_y;
    m.gamma_d = cfg.gamma_d;
    m.zx_dim = cfg.zx_dim;
    m.zy_dim = cfg.zy_dim;
    m.zd_dim = cfg.zd_dim;
    return m;
}

inline TrainerConfig trainer_config_for(const ExperimentConfig& cfg) {
    TrainerConfig t;
    t.chain.clear();
    for (TrainerKind k : resolve_trainer(cfg.trainer))
        t.chain.push_back({k, k == TrainerKind::basic ? 0.0 : cfg.gamma_for(to_string(k))});
    t.dial.n_steps = cfg.dial_steps;
    t.dial.epsilon = cfg.dial_epsilon;
    t.dial.step_size = cfg.dial_step_size;
    t.mldg.inner_lr = cfg.mldg_inner_lr;
    t.fishr.ema_decay = cfg.fishr_ema;
    t.validate();
    return t;
}

/// Builder: task, split, model, trainer chain, optimizer and observer.
/// Seeds: split = seed, network init = seed + 1, epoch e shuffles with seed + 2 + e.
inline Experiment build_experiment(const ExperimentConfig& cfg) {
    Experiment e;
    e.config = cfg;
    e.task = std::make_shared<const Task>(load_task(cfg));
    const Task& task = *e.task;

    const ModelConfig mc = model_config_for(cfg, task);
    const TrainerConfig tc = trainer_config_for(cfg);
    for (TrainerKind k : {TrainerKind::mldg, TrainerKind::fishr})
        if (tc.has(k) && task.train_domain_count() < 2)
            throw ConfigError("trainer", std::string(to_string(k)) + " requires >= 2 training domains");
    if (tc.has(TrainerKind::fishr) && cfg.bs < 2)
        throw ConfigError("bs", "fishr needs a batch size of at least 2");

    e.split = split_train_val(task, cfg.seed);
    e.model = Model::build(mc, cfg.seed + 1);
    e.trainer = Trainer(tc);
    e.optimizer = Optimizer(cfg.optimizer);
    e.observer = Observer(val_views(task, e.split), cfg.patience);
    return e;
}

inline void run_training(Experiment& e, const std::function<void(const EpochRecord&)>& log = {}) {
    TrainOptions opts;
    opts.epochs = e.config.epos;
    opts.batch_size = e.config.bs;
    opts.shuffle_seed = e.config.seed + 2;
    opts.on_record = log;
    e.history = train(e.model, e.trainer, *e.task, e.split, opts, e.optimizer, e.observer);
    e.trained = true;
}

/// Restores the best-validation snapshot and evaluates every test domain on
/// its full data. Test data is first read here.
inline RunResult select_and_evaluate(Experiment& e) {
    if (!e.trained) throw Error("select_and_evaluate called before training");
    e.model.params() = e.observer.snapshot();
    RunResult r;
    r.model = e.config.model;
    r.trainer = e.config.trainer;
    r.seed = e.config.seed;
    r.epochs_run = e.history.size();
    r.selected_epoch = e.observer.best_epoch().value_or(0);
    r.val_accuracy = e.observer.best_metric();
    for (const auto& name : e.task->test_domains()) {
        const DomainDataset& data = e.task->test_data(name);
        r.test_accuracy.push_back({name, accuracy(e.model, e.model.params(), {full_view(data)})});
    }
    r.history = e.history;
    return r;
}

inline RunResult run_experiment(const ExperimentConfig& cfg,
                                const std::function<void(const EpochRecord&)>& log = {}) {
    const auto start = std::chrono::steady_clock::now();
    Experiment e = build_experiment(cfg);
    run_training(e, log);
    RunResult r = select_and_evaluate(e);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace dglab
