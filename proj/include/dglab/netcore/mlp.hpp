#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dglab/error.hpp"
#include "dglab/netcore/params.hpp"
#include "dglab/netcore/tensor.hpp"
#include "dglab/rng.hpp"

namespace dglab {

enum class Activation { relu, tanh, identity };

inline const char* to_string(Activation a) noexcept {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::identity: return "identity";
    }
    return "?";
}

/// Fully connected network shape. The activation is applied after every
/// hidden layer, and after the output layer only when `activate_output`.
struct MlpSpec {
    std::vector<std::size_t> layer_sizes;
    Activation activation = Activation::relu;
    double init_scale = 1.0;
    bool activate_output = false;

    std::size_t input_dim() const noexcept { return layer_sizes.front(); }
    std::size_t output_dim() const noexcept { return layer_sizes.back(); }
    std::size_t layer_count() const noexcept { return layer_sizes.size() - 1; }

    void validate() const {
        if (layer_sizes.size() < 2)
            throw ConfigError("layer_sizes", "MLP needs at least an input and an output size");
        for (std::size_t s : layer_sizes)
            if (s < 1) throw ConfigError("layer_sizes", "MLP layer sizes must be >= 1");
    }

    std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
            n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
        return n;
    }
};

/// Everything `backward` needs from a forward pass.
struct ActivationTrace {
    std::vector<Tensor> inputs;       // input of each layer
    std::vector<Tensor> pre;          // pre-activation of each layer
    Tensor logits;                    // network output
};

/// Weights W{l} (fan_in x fan_out) drawn from U(-s, s) with
/// s = init_scale / sqrt(fan_in); biases b{l} zero.
inline ParamSet mlp_init(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    ParamSet params(seed);
    Rng rng(seed);
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const std::size_t fan_in = spec.layer_sizes[l];
        const std::size_t fan_out = spec.layer_sizes[l + 1];
        const double bound = spec.init_scale / std::sqrt(static_cast<double>(fan_in));
        Tensor w = Tensor::matrix(fan_in, fan_out);
        for (double& v : w.values()) v = rng.uniform(-bound, bound);
        params.add("W" + std::to_string(l), std::move(w));
        params.add("b" + std::to_string(l), Tensor({fan_out}));
    }
    return params;
}

/// An MLP whose weights live in a ParamSet starting at `first_param`.
/// The layout is W0, b0, W1, b1, ... as produced by `mlp_init`.
class Mlp {
public:
    Mlp() = default;
    Mlp(MlpSpec spec, std::size_t first_param) : spec_(std::move(spec)), first_(first_param) {
        spec_.validate();
    }

    const MlpSpec& spec() const noexcept { return spec_; }
    std::size_t first_param() const noexcept { return first_; }
    std::size_t param_count() const noexcept { return 2 * spec_.layer_count(); }

    ActivationTrace forward(const ParamSet& params, const Tensor& x) const {
        if (x.rank() != 2 || x.cols() != spec_.input_dim())
            throw NumericError("MLP input " + x.shape_string() + " does not match input dim " +
                               std::to_string(spec_.input_dim()));
        ActivationTrace trace;
        trace.inputs.reserve(spec_.layer_count());
        trace.pre.reserve(spec_.layer_count());
        Tensor current = x;
        for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
            const Tensor& w = params[first_ + 2 * l].value;
            const Tensor& b = params[first_ + 2 * l + 1].value;
            Tensor z = affine(current, w, b);
            Tensor a = z;
            if (activated(l)) apply_activation(a);
            trace.inputs.push_back(std::move(current));
            trace.pre.push_back(std::move(z));
            current = std::move(a);
        }
        trace.logits = std::move(current);
        return trace;
    }

    Tensor logits(const ParamSet& params, const Tensor& x) const { return forward(params, x).logits; }

    /// Accumulates parameter gradients into `grads` (skipped when null) and
    /// returns the gradient with respect to the network input.
    Tensor backward(const ParamSet& params, const ActivationTrace& trace, const Tensor& d_out,
                    ParamSet* grads) const {
        if (!d_out.same_shape(trace.logits))
            throw NumericError("backward: output gradient " + d_out.shape_string() +
                               " does not match logits " + trace.logits.shape_string());
        Tensor delta = d_out;
        for (std::size_t l = spec_.layer_count(); l-- > 0;) {
            if (activated(l)) apply_activation_grad(trace.pre[l], delta);
            const Tensor& input = trace.inputs[l];
            const Tensor& w = params[first_ + 2 * l].value;
            const std::size_t batch = input.rows();
            const std::size_t fan_in = w.rows();
            const std::size_t fan_out = w.cols();
            if (grads != nullptr) {
                Tensor& gw = (*grads)[first_ + 2 * l].grad;
                Tensor& gb = (*grads)[first_ + 2 * l + 1].grad;
                for (std::size_t n = 0; n < batch; ++n)
                    for (std::size_t i = 0; i < fan_in; ++i) {
                        const double xi = input.at(n, i);
                        if (xi == 0.0) continue;
                        for (std::size_t j = 0; j < fan_out; ++j) gw.at(i, j) += xi * delta.at(n, j);
                    }
                for (std::size_t n = 0; n < batch; ++n)
                    for (std::size_t j = 0; j < fan_out; ++j) gb[j] += delta.at(n, j);
            }
            Tensor d_in = Tensor::matrix(batch, fan_in);
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t i = 0; i < fan_in; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < fan_out; ++j) s += w.at(i, j) * delta.at(n, j);
                    d_in.at(n, i) = s;
                }
            delta = std::move(d_in);
        }
        return delta;
    }

private:
    bool activated(std::size_t layer) const noexcept {
        return layer + 1 < spec_.layer_count() || spec_.activate_output;
    }

    static Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
        const std::size_t batch = x.rows();
        const std::size_t fan_in = w.rows();
        const std::size_t fan_out = w.cols();
        Tensor z = Tensor::matrix(batch, fan_out);
        for (std::size_t n = 0; n < batch; ++n) {
            auto zr = z.row(n);
            for (std::size_t j = 0; j < fan_out; ++j) zr[j] = b[j];
            for (std::size_t i = 0; i < fan_in; ++i) {
                const double xi = x.at(n, i);
                for (std::size_t j = 0; j < fan_out; ++j) zr[j] += xi * w.at(i, j);
            }
        }
        return z;
    }

    void apply_activation(Tensor& t) const noexcept {
        switch (spec_.activation) {
            case Activation::relu:
                for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
                break;
            case Activation::tanh:
                for (double& v : t.values()) v = std::tanh(v);
                break;
            case Activation::identity: break;
        }
    }

    void apply_activation_grad(const Tensor& pre, Tensor& delta) const noexcept {
        switch (spec_.activation) {
            case Activation::relu:
                for (std::size_t i = 0; i < delta.size(); ++i)
                    if (pre[i] <= 0.0) delta[i] = 0.0;
                break;
            case Activation::tanh:
                for (std::size_t i = 0; i < delta.size(); ++i) {
                    const double t = std::tanh(pre[i]);
                    delta[i] *= 1.0 - t * t;
                }
                break;
            case Activation::identity: break;
        }
    }

    MlpSpec spec_;
    std::size_t first_ = 0;
};

/// Standalone forward pass for a ParamSet laid out by `mlp_init`.
inline ActivationTrace forward(const ParamSet& params, const MlpSpec& spec, const Tensor& x) {
    return Mlp(spec, 0).forward(params, x);
}

/// Standalone backward pass; gradients are added to `params`' buffers.
inline Tensor backward(ParamSet& params, const MlpSpec& spec, const ActivationTrace& trace,
                       const Tensor& d_logits) {
    return Mlp(spec, 0).backward(params, trace, d_logits, &params);
}

}  // namespace dglab
