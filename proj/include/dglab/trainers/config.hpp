#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dglab/error.hpp"

namespace dglab {

enum class TrainerKind { basic, dial, mldg, fishr };

inline const char* to_string(TrainerKind k) noexcept {
    switch (k) {
        case TrainerKind::basic: return "basic";
        case TrainerKind::dial: return "dial";
        case TrainerKind::mldg: return "mldg";
        case TrainerKind::fishr: return "fishr";
    }
    return "?";
}

/// FGSM-style adversarial augmentation with l-infinity projection.
struct DialConfig {
    int n_steps = 3;
    double epsilon = 0.3;
    std::optional<double> step_size;  // defaults to epsilon / 3

    double resolved_step() const noexcept { return step_size ? *step_size : epsilon / 3.0; }

    void validate() const {
        if (n_steps < 1) throw ConfigError("dial_steps", "dial_steps must be >= 1");
        if (!(epsilon >= 0.0)) throw ConfigError("dial_epsilon", "dial_epsilon must be >= 0");
        if (step_size && !(*step_size > 0.0)) throw ConfigError("dial_step_size", "dial_step_size must be > 0");
    }
};

struct MldgConfig {
    std::optional<double> inner_lr;  // defaults to the optimizer learning rate
};

struct FishrConfig {
    double ema_decay = 0.9;
    double fd_epsilon = 1e-5;  // central-difference step for the penalty gradient

    void validate() const {
        if (!(ema_decay >= 0.0 && ema_decay < 1.0))
            throw ConfigError("fishr_ema", "fishr_ema must lie in [0, 1)");
        if (!(fd_epsilon > 0.0)) throw ConfigError("fishr_fd_eps", "finite-difference step must be > 0");
    }
};

struct TrainerStage {
    TrainerKind kind = TrainerKind::basic;
    double gamma_reg = 0.0;
};

/// A decoration chain, outermost first: "mldg_dial" is {mldg, dial}.
struct TrainerConfig {
    std::vector<TrainerStage> chain{{TrainerKind::basic, 0.0}};
    DialConfig dial;
    MldgConfig mldg;
    FishrConfig fishr;

    bool has(TrainerKind k) const noexcept {
        for (const auto& s : chain)
            if (s.kind == k) return true;
        return false;
    }

    std::string name() const {
        std::string s;
        for (std::size_t i = 0; i < chain.size(); ++i) s += (i ? "_" : "") + std::string(to_string(chain[i].kind));
        return s;
    }

    void validate() const {
        if (chain.empty()) throw ConfigError("trainer", "trainer chain is empty");
        if (chain.size() > 1 && has(TrainerKind::basic))
            throw ConfigError("trainer", "'basic' cannot be combined with other trainers");
        for (const auto& s : chain)
            if (!(s.gamma_reg >= 0.0)) throw ConfigError("gamma_reg", "gamma_reg must be >= 0");
        dial.validate();
        fishr.validate();
        if (mldg.inner_lr && !(*mldg.inner_lr >= 0.0))
            throw ConfigError("mldg_inner_lr", "mldg_inner_lr must be >= 0");
    }
};

}  // namespace dglab
