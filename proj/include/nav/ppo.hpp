#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nav/config.hpp"
#include "nav/rollout.hpp"

namespace nav {

struct TrainAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UpdateDiagnostics {
    double policy_loss{0.0};   // negative clipped objective
    double value_loss{0.0};
    double entropy{0.0};
    double clip_fraction{0.0};
    double ratio_mean{0.0};
};

/// Clipped-surrogate objective for one sample (maximized).
inline double clipped_surrogate(double ratio, double advantage, double clip_ratio) {
    const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    return std::min(ratio * advantage, clipped * advantage);
}

/// Several passes of minibatch updates over a shuffled batch: gradient
/// ascent on the clipped surrogate for the policy, squared-error descent
/// for the value function.
template <typename T>
UpdateDiagnostics ppo_update(GaussianPolicy<T>& policy, ValueNet<T>& value,
                             AdamOptimizer<T>& policy_opt, AdamOptimizer<T>& value_opt,
                             const FlatBatch<T>& batch, const TrainConfig& cfg, Rng& rng) {
    const int n = batch.n;
    if (n == 0) throw std::invalid_argument("ppo_update: empty batch");
    const int msize = batch.map_size;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    UpdateDiagnostics diag;
    long diag_count = 0;

    std::vector<T> mb_maps, mb_goals;
    AlignedVec<T> dmean;  // mapped by backward(); must keep Eigen alignment
    AlignedVec<T> dvalue;

    for (int pass = 0; pass < cfg.update_epochs; ++pass) {
        // Fisher-Yates with the portable rng.
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
            std::swap(order[i], order[j]);
        }
        for (int start = 0; start < n; start += cfg.minibatch_size) {
            const int m = std::min(cfg.minibatch_size, n - start);
            mb_maps.resize(static_cast<std::size_t>(m) * msize);
            mb_goals.resize(static_cast<std::size_t>(m) * 3);
            for (int k = 0; k < m; ++k) {
                const int idx = order[start + k];
                std::copy(batch.maps.begin() + static_cast<std::size_t>(idx) * msize,
                          batch.maps.begin() + static_cast<std::size_t>(idx + 1) * msize,
                          mb_maps.begin() + static_cast<std::size_t>(k) * msize);
                std::copy(batch.goals.begin() + static_cast<std::size_t>(idx) * 3,
                          batch.goals.begin() + static_cast<std::size_t>(idx) * 3 + 3,
                          mb_goals.begin() + static_cast<std::size_t>(k) * 3);
            }

            // ---- policy ----
            const auto std_dev = policy.stddev();
            const T* means = policy.forward_mean(mb_maps.data(), mb_goals.data(), m);
            dmean.assign(static_cast<std::size_t>(m) * kActionDim, T(0));
            std::array<double, kActionDim> dlog_std{};
            double obj = 0.0, ratio_sum = 0.0, clip_count = 0.0;
            for (int k = 0; k < m; ++k) {
                const int idx = order[start + k];
                const std::array<T, kActionDim> mean{means[k * kActionDim],
                                                     means[k * kActionDim + 1]};
                const double logp = static_cast<double>(
                    gaussian_log_prob(mean, std_dev, batch.actions[idx]));
                const double ratio = std::exp(logp - batch.logp_old[idx]);
                const double adv = batch.advantages[idx];
                obj += clipped_surrogate(ratio, adv, cfg.clip_ratio);
                ratio_sum += ratio;
                const bool clipped_out = (adv >= 0.0 && ratio > 1.0 + cfg.clip_ratio) ||
                                         (adv < 0.0 && ratio < 1.0 - cfg.clip_ratio);
                if (clipped_out) clip_count += 1.0;
                // d(objective)/d logp; zero where the clip branch is flat.
                const double g = clipped_out ? 0.0 : ratio * adv;
                const double coeff = -g / m;  // minimize the negative objective
                for (int d = 0; d < kActionDim; ++d) {
                    const double z = static_cast<double>(batch.actions[idx][d] - mean[d]) /
                                     static_cast<double>(std_dev[d]);
                    dmean[k * kActionDim + d] +=
                        static_cast<T>(coeff * (-z / static_cast<double>(std_dev[d])) * -1.0);
                    dlog_std[d] += coeff * (z * z - 1.0);
                }
            }
            const double entropy = static_cast<double>(gaussian_entropy(std_dev));
            for (int d = 0; d < kActionDim; ++d) dlog_std[d] -= cfg.entropy_coef;  // dH/dlogstd = 1
            const double pi_loss = -obj / m - cfg.entropy_coef * entropy;
            if (!std::isfinite(pi_loss)) {
                throw TrainAbort("non-finite policy loss during update");
            }
            auto& pstore = policy.store();
            pstore.zero_grad();
            policy.net().backward(pstore, dmean.data(), m);
            for (int d = 0; d < kActionDim; ++d) {
                pstore.grads[policy.log_std_offset() + d] += static_cast<T>(dlog_std[d]);
            }
            policy_opt.step(pstore, static_cast<T>(cfg.max_grad_norm));

            // ---- value ----
            const T* vals = value.forward(mb_maps.data(), mb_goals.data(), m);
            dvalue.resize(m);
            double v_loss = 0.0;
            for (int k = 0; k < m; ++k) {
                const int idx = order[start + k];
                const double err = static_cast<double>(vals[k]) - batch.returns[idx];
                v_loss += err * err;
                dvalue[k] = static_cast<T>(2.0 * err / m);
            }
            v_loss /= m;
            if (!std::isfinite(v_loss)) {
                throw TrainAbort("non-finite value loss during update");
            }
            auto& vstore = value.store();
            vstore.zero_grad();
            value.net().backward(vstore, dvalue.data(), m);
            value_opt.step(vstore, static_cast<T>(cfg.max_grad_norm));

            diag.policy_loss += pi_loss;
            diag.value_loss += v_loss;
            diag.entropy += entropy;
            diag.clip_fraction += clip_count / m;
            diag.ratio_mean += ratio_sum / m;
            ++diag_count;
        }
    }
    if (diag_count > 0) {
        diag.policy_loss /= diag_count;
        diag.value_loss /= diag_count;
        diag.entropy /= diag_count;
        diag.clip_fraction /= diag_count;
        diag.ratio_mean /= diag_count;
    }
    return diag;
}

}  // namespace nav
