#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nav/nn.hpp"
#include "nav/world.hpp"

namespace nav {

inline constexpr int kActionDim = 2;
inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

/// Architecture knobs. Defaults are the full-size network; tests shrink it.
struct NetConfig {
    bool conv2d{true};
    int in_frames{3};
    int map_size{48};  // image side (2d) or sequence length (1d)
    int c1{32}, c2{64}, c3{64};
    int fc{512};
    int goal_dim{3};
    int out_dim{kActionDim};

    int input_size() const {
        return in_frames * (conv2d ? map_size * map_size : map_size);
    }
    int flat_size() const {
        const int s = map_size / 8;
        return conv2d ? c3 * s * s : c3 * s;
    }
};

/// Conv trunk -> fc1 -> concat(goal) -> fc2 -> linear head. The 1D variant
/// swaps in 1D convolutions of matching depth for the flat encoders.
template <typename T>
class FigNet {
public:
    FigNet(const NetConfig& cfg, ParamStore<T>& store, Rng& rng, T head_gain)
        : cfg_(cfg) {
        if (cfg.map_size % 8 != 0) {
            throw std::invalid_argument("FigNet: map_size must be divisible by 8");
        }
        const T g = std::sqrt(T(2));
        const int s = cfg.map_size;
        if (cfg.conv2d) {
            conv2_[0].init(store, "conv1", cfg.in_frames, cfg.c1, s, s, rng, g);
            conv2_[1].init(store, "conv2", cfg.c1, cfg.c2, s / 2, s / 2, rng, g);
            conv2_[2].init(store, "conv3", cfg.c2, cfg.c3, s / 4, s / 4, rng, g);
            pool2_[0] = {cfg.c1, s, s};
            pool2_[1] = {cfg.c2, s / 2, s / 2};
            pool2_[2] = {cfg.c3, s / 4, s / 4};
        } else {
            conv1_[0].init(store, "conv1", cfg.in_frames, cfg.c1, s, rng, g);
            conv1_[1].init(store, "conv2", cfg.c1, cfg.c2, s / 2, rng, g);
            conv1_[2].init(store, "conv3", cfg.c2, cfg.c3, s / 4, rng, g);
            pool1_[0] = {cfg.c1, s};
            pool1_[1] = {cfg.c2, s / 2};
            pool1_[2] = {cfg.c3, s / 4};
        }
        fc1_.init(store, "fc1", cfg.flat_size(), cfg.fc, rng, g);
        fc2_.init(store, "fc2", cfg.fc + cfg.goal_dim, cfg.fc, rng, g);
        head_.init(store, "head", cfg.fc, cfg.out_dim, rng, head_gain);
    }

    const NetConfig& config() const { return cfg_; }

    /// maps: [n, input_size], goal: [n, goal_dim]. Returns [n, out_dim]
    /// (view into an internal workspace, valid until the next call).
    const T* forward(const ParamStore<T>& store, const T* maps, const T* goal, int n) {
        resize(n);
        std::copy(maps, maps + static_cast<std::size_t>(n) * cfg_.input_size(), x_.data());
        for (int l = 0; l < 3; ++l) {
            const T* in = l == 0 ? x_.data() : p_[l - 1].data();
            if (cfg_.conv2d) {
                conv2_[l].forward(store, in, z_[l].data(), n);
                nn::relu_forward(z_[l].data(), z_[l].size());
                pool2_[l].forward(z_[l].data(), p_[l].data(), arg_[l].data(), n);
            } else {
                conv1_[l].forward(store, in, z_[l].data(), n);
                nn::relu_forward(z_[l].data(), z_[l].size());
                pool1_[l].forward(z_[l].data(), p_[l].data(), arg_[l].data(), n);
            }
        }
        fc1_.forward(store, p_[2].data(), f1_.data(), n);
        nn::relu_forward(f1_.data(), f1_.size());
        for (int s = 0; s < n; ++s) {
            std::copy(f1_.data() + s * cfg_.fc, f1_.data() + (s + 1) * cfg_.fc,
                      cat_.data() + s * (cfg_.fc + cfg_.goal_dim));
            std::copy(goal + s * cfg_.goal_dim, goal + (s + 1) * cfg_.goal_dim,
                      cat_.data() + s * (cfg_.fc + cfg_.goal_dim) + cfg_.fc);
        }
        fc2_.forward(store, cat_.data(), f2_.data(), n);
        nn::relu_forward(f2_.data(), f2_.size());
        head_.forward(store, f2_.data(), out_.data(), n);
        return out_.data();
    }

    /// Accumulates parameter gradients for the batch of the last forward().
    void backward(ParamStore<T>& store, const T* dout, int n) {
        head_.backward(store, f2_.data(), dout, df2_.data(), n);
        nn::relu_backward(f2_.data(), df2_.data(), df2_.size());
        fc2_.backward(store, cat_.data(), df2_.data(), dcat_.data(), n);
        for (int s = 0; s < n; ++s) {
            std::copy(dcat_.data() + s * (cfg_.fc + cfg_.goal_dim),
                      dcat_.data() + s * (cfg_.fc + cfg_.goal_dim) + cfg_.fc,
                      df1_.data() + s * cfg_.fc);
        }
        nn::relu_backward(f1_.data(), df1_.data(), df1_.size());
        fc1_.backward(store, p_[2].data(), df1_.data(), dp_.data(), n);
        for (int l = 2; l >= 0; --l) {
            if (cfg_.conv2d) {
                pool2_[l].backward(dp_.data(), arg_[l].data(), dz_.data(), n);
                nn::relu_backward(z_[l].data(), dz_.data(), z_[l].size());
                conv2_[l].backward(store, l == 0 ? x_.data() : p_[l - 1].data(), dz_.data(),
                                   l == 0 ? nullptr : dp_.data(), n);
            } else {
                pool1_[l].backward(dp_.data(), arg_[l].data(), dz_.data(), n);
                nn::relu_backward(z_[l].data(), dz_.data(), z_[l].size());
                conv1_[l].backward(store, l == 0 ? x_.data() : p_[l - 1].data(), dz_.data(),
                                   l == 0 ? nullptr : dp_.data(), n);
            }
        }
    }

private:
    void resize(int n) {
        const std::size_t nn_ = static_cast<std::size_t>(n);
        x_.resize(nn_ * cfg_.input_size());
        std::size_t max_zp = 0;
        for (int l = 0; l < 3; ++l) {
            const std::size_t zs =
                nn_ * (cfg_.conv2d ? conv2_[l].out_size() : conv1_[l].out_size());
            const std::size_t ps =
                nn_ * (cfg_.conv2d ? pool2_[l].out_size() : pool1_[l].out_size());
            z_[l].resize(zs);
            p_[l].resize(ps);
            arg_[l].resize(ps);
            max_zp = std::max({max_zp, zs, ps});
        }
        f1_.resize(nn_ * cfg_.fc);
        cat_.resize(nn_ * (cfg_.fc + cfg_.goal_dim));
        f2_.resize(nn_ * cfg_.fc);
        out_.resize(nn_ * cfg_.out_dim);
        df2_.resize(f2_.size());
        dcat_.resize(cat_.size());
        df1_.resize(f1_.size());
        dz_.resize(max_zp);
        dp_.resize(max_zp);
    }

    NetConfig cfg_;
    std::array<nn::Conv2d<T>, 3> conv2_;
    std::array<nn::MaxPool2d<T>, 3> pool2_;
    std::array<nn::Conv1d<T>, 3> conv1_;
    std::array<nn::MaxPool1d<T>, 3> pool1_;
    nn::Linear<T> fc1_, fc2_, head_;
    // forward caches
    AlignedVec<T> x_, f1_, cat_, f2_, out_;
    std::array<AlignedVec<T>, 3> z_, p_;
    std::array<std::vector<std::uint8_t>, 3> arg_;
    // backward scratch
    AlignedVec<T> df2_, dcat_, df1_, dz_, dp_;
};

/// Diagonal Gaussian over the 2D action.
template <typename T>
struct ActionDistribution {
    std::array<T, kActionDim> mean{};
    std::array<T, kActionDim> std{};
};

template <typename T>
T gaussian_log_prob(const std::array<T, kActionDim>& mean, const std::array<T, kActionDim>& std,
                    const std::array<T, kActionDim>& a) {
    T lp = T(0);
    for (int i = 0; i < kActionDim; ++i) {
        const T z = (a[i] - mean[i]) / std[i];
        lp += T(-0.5) * z * z - std::log(std[i]) - T(0.5) * std::log(T(2) * T(pi));
    }
    return lp;
}

/// Entropy of the diagonal Gaussian.
template <typename T>
T gaussian_entropy(const std::array<T, kActionDim>& std) {
    T h = T(0);
    for (int i = 0; i < kActionDim; ++i) {
        h += std::log(std[i]) + T(0.5) * (T(1) + std::log(T(2) * T(pi)));
    }
    return h;
}

/// Affine map + clip from the Gaussian's natural range to the command
/// bounds. log-probs are always of the pre-clip sample.
inline VelocityCommand action_to_command(double a0, double a1) {
    return VelocityCommand(0.3 + 0.3 * a0, 0.9 * a1);
}

/// Gaussian policy: mean from the FigNet head, log-std from a standalone
/// state-independent parameter vector.
template <typename T>
class GaussianPolicy {
public:
    GaussianPolicy(const NetConfig& cfg, Rng& rng)
        : net_(cfg, store_, rng, T(0.01)) {
        log_std_off_ = store_.add("log_std", {kActionDim});
        for (int i = 0; i < kActionDim; ++i) store_.values[log_std_off_ + i] = T(-0.5);
    }

    ParamStore<T>& store() { return store_; }
    const ParamStore<T>& store() const { return store_; }
    FigNet<T>& net() { return net_; }
    const NetConfig& config() const { return net_.config(); }
    std::size_t log_std_offset() const { return log_std_off_; }

    std::array<T, kActionDim> stddev() const {
        std::array<T, kActionDim> s;
        for (int i = 0; i < kActionDim; ++i) {
            const T ls = std::clamp(store_.values[log_std_off_ + i], T(kLogStdMin), T(kLogStdMax));
            s[i] = std::exp(ls);
        }
        return s;
    }

    /// Batched means; result valid until the next forward call.
    const T* forward_mean(const T* maps, const T* goal, int n) {
        return net_.forward(store_, maps, goal, n);
    }

    ActionDistribution<T> forward_policy(const T* maps, const T* goal) {
        const T* m = forward_mean(maps, goal, 1);
        ActionDistribution<T> d;
        d.mean = {m[0], m[1]};
        d.std = stddev();
        return d;
    }

private:
    ParamStore<T> store_;
    std::size_t log_std_off_;
    FigNet<T> net_;
};

template <typename T>
struct SampledAction {
    std::array<T, kActionDim> raw{};  // pre-clip Gaussian sample
    VelocityCommand command;
    T log_prob{};
};

template <typename T>
SampledAction<T> sample_action(const ActionDistribution<T>& dist, Rng& rng) {
    SampledAction<T> out;
    for (int i = 0; i < kActionDim; ++i) {
        out.raw[i] = dist.mean[i] + dist.std[i] * static_cast<T>(rng.normal());
    }
    out.log_prob = gaussian_log_prob(dist.mean, dist.std, out.raw);
    out.command = action_to_command(static_cast<double>(out.raw[0]),
                                    static_cast<double>(out.raw[1]));
    return out;
}

/// Greedy action: the distribution mean, mapped and clipped.
template <typename T>
VelocityCommand mean_action(const ActionDistribution<T>& dist) {
    return action_to_command(static_cast<double>(dist.mean[0]),
                             static_cast<double>(dist.mean[1]));
}

/// Value function with the same trunk shape and its own parameters.
template <typename T>
class ValueNet {
public:
    ValueNet(const NetConfig& cfg, Rng& rng) : net_(value_cfg(cfg), store_, rng, T(1)) {}

    ParamStore<T>& store() { return store_; }
    const ParamStore<T>& store() const { return store_; }
    FigNet<T>& net() { return net_; }
    const NetConfig& config() const { return net_.config(); }

    const T* forward(const T* maps, const T* goal, int n) {
        return net_.forward(store_, maps, goal, n);
    }

    T value(const T* maps, const T* goal) { return forward(maps, goal, 1)[0]; }

private:
    static NetConfig value_cfg(NetConfig cfg) {
        cfg.out_dim = 1;
        return cfg;
    }
    ParamStore<T> store_;
    FigNet<T> net_;
};

}  // namespace nav
