#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "af/encoder.hpp"
#include "af/error.hpp"
#include "af/tensor.hpp"

namespace af::optim {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam. Moments and step counts are tracked per block so a
// frozen block's state is literally untouched while it sits out.
template <typename T>
struct AdamState {
    ParamStore<T> m;
    ParamStore<T> v;
    std::map<std::string, uint64_t> steps;

    static AdamState zeros_like(const ParamStore<T>& params) {
        AdamState s;
        s.m = params.zeros_like();
        s.v = params.zeros_like();
        for (const auto& b : params.blocks()) {
            s.steps[b.id] = 0;
        }
        return s;
    }
};

// Applies one Adam update to every parameter whose block is not frozen.
template <typename T>
void train_step(ParamStore<T>& params, const ParamStore<T>& grads,
                const encoder::FreezeMask& mask, AdamState<T>& opt, double lr,
                const AdamConfig& cfg = {}) {
    if (lr < 0) {
        throw ConfigError("learning rate must be >= 0");
    }
    if (!params.same_structure(grads)) {
        throw GradientError("gradient store does not match parameter store");
    }
    for (const std::string& b : mask.frozen_blocks) {
        if (!params.has_block(b)) {
            throw ConfigError("freeze mask references unknown block " + b);
        }
    }

    for (size_t bi = 0; bi < params.blocks().size(); ++bi) {
        auto& block = params.blocks()[bi];
        if (mask.is_frozen(block.id)) {
            continue;
        }
        const auto& gblock = grads.blocks()[bi];
        for (const auto& e : gblock.entries) {
            if (!e.tensor.all_finite()) {
                throw NumericError("non-finite gradient in " + block.id + "." + e.name);
            }
        }
        const uint64_t t = ++opt.steps[block.id];
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
        for (size_t ei = 0; ei < block.entries.size(); ++ei) {
            Tensor<T>& p = block.entries[ei].tensor;
            const Tensor<T>& g = gblock.entries[ei].tensor;
            Tensor<T>& m = opt.m.blocks()[bi].entries[ei].tensor;
            Tensor<T>& v = opt.v.blocks()[bi].entries[ei].tensor;
            for (size_t i = 0; i < p.data.size(); ++i) {
                const double gi = static_cast<double>(g.data[i]);
                const double mi = cfg.beta1 * static_cast<double>(m.data[i]) + (1.0 - cfg.beta1) * gi;
                const double vi = cfg.beta2 * static_cast<double>(v.data[i]) + (1.0 - cfg.beta2) * gi * gi;
                m.data[i] = static_cast<T>(mi);
                v.data[i] = static_cast<T>(vi);
                const double mhat = mi / bc1;
                const double vhat = vi / bc2;
                p.data[i] = static_cast<T>(static_cast<double>(p.data[i]) -
                                           lr * mhat / (std::sqrt(vhat) + cfg.eps));
            }
        }
    }
}

// Model-level convenience: updates the parameters and bumps the revision so
// outstanding forward traces become stale.
template <typename T>
void train_step(encoder::EncoderModel<T>& model, const ParamStore<T>& grads,
                const encoder::FreezeMask& mask, AdamState<T>& opt, double lr,
                const AdamConfig& cfg = {}) {
    train_step(model.params, grads, mask, opt, lr, cfg);
    ++model.revision;
}

} // namespace af::optim
