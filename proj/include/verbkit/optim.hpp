#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace verbkit::optim {

// AdamW with linear warmup over the first warmup_frac of total_steps and
// linear decay to zero afterwards.
struct AdamWConfig {
    double lr = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    double warmup_frac = 0.1;
    std::size_t total_steps = 0;  // 0 disables the schedule (constant lr)
};

class AdamW {
public:
    AdamW(AdamWConfig cfg, std::size_t param_count)
        : cfg_(cfg), m_(param_count, 0.0), v_(param_count, 0.0) {}

    double current_lr() const {
        if (cfg_.total_steps == 0) return cfg_.lr;
        double warm = cfg_.warmup_frac * static_cast<double>(cfg_.total_steps);
        double s = static_cast<double>(step_);
        if (warm > 0.0 && s < warm) return cfg_.lr * (s + 1.0) / warm;
        double rest = static_cast<double>(cfg_.total_steps) - warm;
        if (rest <= 0.0) return cfg_.lr;
        double frac = 1.0 - (s - warm) / rest;
        return cfg_.lr * (frac < 0.0 ? 0.0 : frac);
    }

    void update(std::span<double> params, std::span<const double> grads) {
        double lr = current_lr();
        ++step_;
        double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            double g = grads[i];
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m_[i] / bc1;
            double vhat = v_[i] / bc2;
            params[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * params[i]);
        }
    }

    std::size_t step() const { return step_; }

private:
    AdamWConfig cfg_;
    std::size_t step_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace verbkit::optim
