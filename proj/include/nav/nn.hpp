#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nav/rng.hpp"

namespace nav {

/// Vector whose data pointer satisfies Eigen's preferred alignment. Every
/// buffer Eigen maps must use this: reduction rounding depends on how the
/// pointer is aligned, and plain heap allocations vary run to run, which
/// would break bitwise reproducibility.
template <typename T>
using AlignedVec = std::vector<T, Eigen::aligned_allocator<T>>;

/// Flat parameter/gradient storage with named views. Keeping every tensor
/// in one contiguous block makes the optimizer, checkpointing and the
/// finite-difference checks operate on a single vector.
template <typename T>
struct ParamStore {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::size_t offset{0};
        std::size_t size{0};
    };

    AlignedVec<T> values;
    AlignedVec<T> grads;
    std::vector<Entry> entries;

    std::size_t add(std::string name, std::vector<int> shape) {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        const std::size_t off = values.size();
        entries.push_back({std::move(name), std::move(shape), off, n});
        values.resize(off + n, T(0));
        grads.resize(off + n, T(0));
        return off;
    }

    std::size_t size() const { return values.size(); }
    void zero_grad() { std::fill(grads.begin(), grads.end(), T(0)); }
};

namespace nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

/// Fills W (rows x cols, row-major) with an orthogonal matrix scaled by
/// `gain`; rows (or columns, whichever is smaller) are orthonormal.
template <typename T>
void orthogonal_init(T* w, int rows, int cols, T gain, Rng& rng) {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    const bool wide = cols >= rows;
    const int n = wide ? cols : rows, m = wide ? rows : cols;
    Mat a(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = static_cast<T>(rng.normal());
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ() * Mat::Identity(n, m);
    // Sign correction so the factorization is unique.
    Mat r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int j = 0; j < m; ++j) {
        if (r(j, j) < T(0)) q.col(j) *= T(-1);
    }
    MatMap<T> wm(w, rows, cols);
    if (wide) {
        wm = gain * q.transpose();
    } else {
        wm = gain * q;
    }
}

/// 3x3 same-padding convolution over [C, H, W] feature maps (stride 1).
template <typename T>
struct Conv2d {
    int ic{0}, oc{0}, h{0}, w{0};
    std::size_t w_off{0}, b_off{0};

    void init(ParamStore<T>& store, const std::string& name, int ic_, int oc_, int h_, int w_,
              Rng& rng, T gain) {
        ic = ic_; oc = oc_; h = h_; w = w_;
        w_off = store.add(name + ".weight", {oc, ic, 3, 3});
        b_off = store.add(name + ".bias", {oc});
        orthogonal_init(&store.values[w_off], oc, ic * 9, gain, rng);
    }

    int out_size() const { return oc * h * w; }

    void im2col(const T* x, RowMat<T>& col) const {
        col.resize(ic * 9, h * w);
        for (int c = 0; c < ic; ++c) {
            for (int ky = 0; ky < 3; ++ky) {
                for (int kx = 0; kx < 3; ++kx) {
                    T* dst = col.data() + (c * 9 + ky * 3 + kx) * (h * w);
                    for (int y = 0; y < h; ++y) {
                        const int sy = y + ky - 1;
                        for (int xx = 0; xx < w; ++xx) {
                            const int sx = xx + kx - 1;
                            dst[y * w + xx] =
                                (sy >= 0 && sy < h && sx >= 0 && sx < w)
                                    ? x[(c * h + sy) * w + sx]
                                    : T(0);
                        }
                    }
                }
            }
        }
    }

    /// x: [n, ic*h*w] -> y: [n, oc*h*w]
    void forward(const ParamStore<T>& store, const T* x, T* y, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], oc, ic * 9);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(&store.values[b_off], oc);
        RowMat<T> col;
        for (int s = 0; s < n; ++s) {
            im2col(x + s * ic * h * w, col);
            MatMap<T> ym(y + s * oc * h * w, oc, h * w);
            ym.noalias() = wm * col;
            ym.colwise() += b;
        }
    }

    /// Accumulates parameter grads; writes dx (may be null for the input layer).
    void backward(ParamStore<T>& store, const T* x, const T* dy, T* dx, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], oc, ic * 9);
        MatMap<T> dwm(&store.grads[w_off], oc, ic * 9);
        VecMap<T> db(&store.grads[b_off], oc);
        RowMat<T> col, dcol;
        for (int s = 0; s < n; ++s) {
            im2col(x + s * ic * h * w, col);
            ConstMatMap<T> dym(dy + s * oc * h * w, oc, h * w);
            dwm.noalias() += dym * col.transpose();
            db += dym.rowwise().sum();
            if (!dx) continue;
            dcol.noalias() = wm.transpose() * dym;
            T* dxs = dx + s * ic * h * w;
            std::fill(dxs, dxs + ic * h * w, T(0));
            for (int c = 0; c < ic; ++c) {
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        const T* src = dcol.data() + (c * 9 + ky * 3 + kx) * (h * w);
                        for (int y = 0; y < h; ++y) {
                            const int sy = y + ky - 1;
                            if (sy < 0 || sy >= h) continue;
                            for (int xx = 0; xx < w; ++xx) {
                                const int sx = xx + kx - 1;
                                if (sx >= 0 && sx < w) dxs[(c * h + sy) * w + sx] += src[y * w + xx];
                            }
                        }
                    }
                }
            }
        }
    }
};

/// 3-tap same-padding 1D convolution over [C, L] (stride 1).
template <typename T>
struct Conv1d {
    int ic{0}, oc{0}, len{0};
    std::size_t w_off{0}, b_off{0};

    void init(ParamStore<T>& store, const std::string& name, int ic_, int oc_, int len_, Rng& rng,
              T gain) {
        ic = ic_; oc = oc_; len = len_;
        w_off = store.add(name + ".weight", {oc, ic, 3});
        b_off = store.add(name + ".bias", {oc});
        orthogonal_init(&store.values[w_off], oc, ic * 3, gain, rng);
    }

    int out_size() const { return oc * len; }

    void im2col(const T* x, RowMat<T>& col) const {
        col.resize(ic * 3, len);
        for (int c = 0; c < ic; ++c) {
            for (int k = 0; k < 3; ++k) {
                T* dst = col.data() + (c * 3 + k) * len;
                for (int i = 0; i < len; ++i) {
                    const int si = i + k - 1;
                    dst[i] = (si >= 0 && si < len) ? x[c * len + si] : T(0);
                }
            }
        }
    }

    void forward(const ParamStore<T>& store, const T* x, T* y, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], oc, ic * 3);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(&store.values[b_off], oc);
        RowMat<T> col;
        for (int s = 0; s < n; ++s) {
            im2col(x + s * ic * len, col);
            MatMap<T> ym(y + s * oc * len, oc, len);
            ym.noalias() = wm * col;
            ym.colwise() += b;
        }
    }

    void backward(ParamStore<T>& store, const T* x, const T* dy, T* dx, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], oc, ic * 3);
        MatMap<T> dwm(&store.grads[w_off], oc, ic * 3);
        VecMap<T> db(&store.grads[b_off], oc);
        RowMat<T> col, dcol;
        for (int s = 0; s < n; ++s) {
            im2col(x + s * ic * len, col);
            ConstMatMap<T> dym(dy + s * oc * len, oc, len);
            dwm.noalias() += dym * col.transpose();
            db += dym.rowwise().sum();
            if (!dx) continue;
            dcol.noalias() = wm.transpose() * dym;
            T* dxs = dx + s * ic * len;
            std::fill(dxs, dxs + ic * len, T(0));
            for (int c = 0; c < ic; ++c) {
                for (int k = 0; k < 3; ++k) {
                    const T* src = dcol.data() + (c * 3 + k) * len;
                    for (int i = 0; i < len; ++i) {
                        const int si = i + k - 1;
                        if (si >= 0 && si < len) dxs[c * len + si] += src[i];
                    }
                }
            }
        }
    }
};

/// Fully connected layer, weight [out, in].
template <typename T>
struct Linear {
    int in{0}, out{0};
    std::size_t w_off{0}, b_off{0};

    void init(ParamStore<T>& store, const std::string& name, int in_, int out_, Rng& rng, T gain) {
        in = in_; out = out_;
        w_off = store.add(name + ".weight", {out, in});
        b_off = store.add(name + ".bias", {out});
        orthogonal_init(&store.values[w_off], out, in, gain, rng);
    }

    void forward(const ParamStore<T>& store, const T* x, T* y, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], out, in);
        ConstMatMap<T> xm(x, n, in);
        MatMap<T> ym(y, n, out);
        ym.noalias() = xm * wm.transpose();
        ym.rowwise() +=
            Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(&store.values[b_off], out);
    }

    void backward(ParamStore<T>& store, const T* x, const T* dy, T* dx, int n) const {
        ConstMatMap<T> wm(&store.values[w_off], out, in);
        ConstMatMap<T> xm(x, n, in);
        ConstMatMap<T> dym(dy, n, out);
        MatMap<T> dwm(&store.grads[w_off], out, in);
        dwm.noalias() += dym.transpose() * xm;
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(&store.grads[b_off], out) +=
            dym.colwise().sum();
        if (dx) {
            MatMap<T> dxm(dx, n, in);
            dxm.noalias() = dym * wm;
        }
    }
};

template <typename T>
inline void relu_forward(T* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > T(0) ? x[i] : T(0);
}

/// dx = dy masked by the post-activation values (y > 0).
template <typename T>
inline void relu_backward(const T* y, T* dy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] <= T(0)) dy[i] = T(0);
    }
}

/// 2x2 stride-2 max pooling over [C, H, W]; records argmax for backward.
template <typename T>
struct MaxPool2d {
    int c{0}, h{0}, w{0};  // input dims; output is h/2 x w/2

    int out_size() const { return c * (h / 2) * (w / 2); }

    void forward(const T* x, T* y, std::uint8_t* arg, int n) const {
        const int oh = h / 2, ow = w / 2;
        for (int s = 0; s < n; ++s) {
            const T* xs = x + s * c * h * w;
            T* ys = y + s * c * oh * ow;
            std::uint8_t* as = arg + s * c * oh * ow;
            for (int ch = 0; ch < c; ++ch) {
                for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox) {
                        const int base = (ch * h + 2 * oy) * w + 2 * ox;
                        const T v[4] = {xs[base], xs[base + 1], xs[base + w], xs[base + w + 1]};
                        int best = 0;
                        for (int k = 1; k < 4; ++k) {
                            if (v[k] > v[best]) best = k;
                        }
                        ys[(ch * oh + oy) * ow + ox] = v[best];
                        as[(ch * oh + oy) * ow + ox] = static_cast<std::uint8_t>(best);
                    }
                }
            }
        }
    }

    void backward(const T* dy, const std::uint8_t* arg, T* dx, int n) const {
        const int oh = h / 2, ow = w / 2;
        std::fill(dx, dx + static_cast<std::size_t>(n) * c * h * w, T(0));
        for (int s = 0; s < n; ++s) {
            const T* dys = dy + s * c * oh * ow;
            const std::uint8_t* as = arg + s * c * oh * ow;
            T* dxs = dx + s * c * h * w;
            for (int ch = 0; ch < c; ++ch) {
                for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox) {
                        const int o = (ch * oh + oy) * ow + ox;
                        const int k = as[o];
                        const int base = (ch * h + 2 * oy) * w + 2 * ox;
                        const int off[4] = {0, 1, w, w + 1};
                        dxs[base + off[k]] += dys[o];
                    }
                }
            }
        }
    }
};

/// Length-2 stride-2 max pooling over [C, L].
template <typename T>
struct MaxPool1d {
    int c{0}, len{0};

    int out_size() const { return c * (len / 2); }

    void forward(const T* x, T* y, std::uint8_t* arg, int n) const {
        const int ol = len / 2;
        for (int s = 0; s < n; ++s) {
            const T* xs = x + s * c * len;
            T* ys = y + s * c * ol;
            std::uint8_t* as = arg + s * c * ol;
            for (int ch = 0; ch < c; ++ch) {
                for (int o = 0; o < ol; ++o) {
                    const T a = xs[ch * len + 2 * o], b = xs[ch * len + 2 * o + 1];
                    ys[ch * ol + o] = a >= b ? a : b;
                    as[ch * ol + o] = a >= b ? 0 : 1;
                }
            }
        }
    }

    void backward(const T* dy, const std::uint8_t* arg, T* dx, int n) const {
        const int ol = len / 2;
        std::fill(dx, dx + static_cast<std::size_t>(n) * c * len, T(0));
        for (int s = 0; s < n; ++s) {
            const T* dys = dy + s * c * ol;
            const std::uint8_t* as = arg + s * c * ol;
            T* dxs = dx + s * c * len;
            for (int ch = 0; ch < c; ++ch) {
                for (int o = 0; o < ol; ++o) {
                    dxs[ch * len + 2 * o + as[ch * ol + o]] += dys[ch * ol + o];
                }
            }
        }
    }
};

}  // namespace nn

/// Adam with default moment coefficients, applied to a whole ParamStore.
template <typename T>
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n, T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, T(0)), v_(n, T(0)) {}

    T learning_rate() const { return lr_; }
    void set_learning_rate(T lr) { lr_ = lr; }

    /// One update from store.grads; optional global gradient-norm clip
    /// (<= 0 disables clipping).
    void step(ParamStore<T>& store, T max_grad_norm = T(0)) {
        T* g = store.grads.data();
        const std::size_t n = store.size();
        if (max_grad_norm > T(0)) {
            T sq = T(0);
            for (std::size_t i = 0; i < n; ++i) sq += g[i] * g[i];
            const T norm = std::sqrt(sq);
            if (norm > max_grad_norm) {
                const T scale = max_grad_norm / norm;
                for (std::size_t i = 0; i < n; ++i) g[i] *= scale;
            }
        }
        ++t_;
        const T bc1 = T(1) - std::pow(beta1_, T(t_));
        const T bc2 = T(1) - std::pow(beta2_, T(t_));
        for (std::size_t i = 0; i < n; ++i) {
            m_[i] = beta1_ * m_[i] + (T(1) - beta1_) * g[i];
            v_[i] = beta2_ * v_[i] + (T(1) - beta2_) * g[i] * g[i];
            store.values[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
        }
    }

private:
    T lr_, beta1_, beta2_, eps_;
    long t_{0};
    std::vector<T> m_, v_;
};

}  // namespace nav
