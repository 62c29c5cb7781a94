#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>

#include "csi2img/gemm.hpp"
#include "csi2img/rng.hpp"
#include "csi2img/tensor.hpp"

namespace csi2img {

// Layers follow one convention: forward() caches what backward() needs;
// backward() overwrites the parameter gradients and returns the input
// gradient. Parameters live in the layer.

template <typename T>
struct DenseT {
    TensorT<T> w, b, gw, gb;
    TensorT<T> x_cache;

    DenseT(int in, int out)
        : w({in, out}), b({out}), gw({in, out}), gb({out}) {}

    void init(Rng& rng, T stddev) {
        for (auto& v : w.data) v = T(rng.normal()) * stddev;
        std::fill(b.data.begin(), b.data.end(), T(0));
    }

    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        if (x.rank() != 2 || x.dim(1) != w.dim(0))
            throw std::invalid_argument("dense: input shape mismatch");
        const int m = x.dim(0), k = w.dim(0), n = w.dim(1);
        TensorT<T> y({m, n});
        gemm(x.ptr(), w.ptr(), y.ptr(), m, k, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) y.at2(i, j) += b.data[size_t(j)];
        if (train) x_cache = x;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        const int m = x_cache.dim(0), k = w.dim(0), n = w.dim(1);
        if (gy.rank() != 2 || gy.dim(0) != m || gy.dim(1) != n)
            throw std::invalid_argument("dense backward: gradient shape mismatch");
        gemm_at(x_cache.ptr(), gy.ptr(), gw.ptr(), m, k, n);
        for (int j = 0; j < n; ++j) {
            T s = T(0);
            for (int i = 0; i < m; ++i) s += gy.at2(i, j);
            gb.data[size_t(j)] = s;
        }
        TensorT<T> wt({n, k});
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < n; ++j) wt.at2(j, i) = w.at2(i, j);
        TensorT<T> gx({m, k});
        gemm(gy.ptr(), wt.ptr(), gx.ptr(), m, n, k);
        return gx;
    }
};

// 3x3 cross-correlation with zero same-padding (output = ceil(in/stride),
// padding split with the shorter side first). Weights are stored
// [ky*3*in_ch + kx*in_ch + c][out_ch], which is exactly the im2col column
// order, so forward is a single matrix product.
template <typename T>
struct Conv2dT {
    static constexpr int kKernel = 3;
    int in_ch, out_ch, stride;
    TensorT<T> w, b, gw, gb;

    std::vector<int> x_shape;
    TensorT<T> col_cache;    // [rows x 9*in_ch], reused between calls
    TensorT<T> gcol_scratch;
    int out_h = 0, out_w = 0;

    Conv2dT(int in_channels, int out_channels, int stride_)
        : in_ch(in_channels),
          out_ch(out_channels),
          stride(stride_),
          w({kKernel * kKernel * in_channels, out_channels}),
          b({out_channels}),
          gw({kKernel * kKernel * in_channels, out_channels}),
          gb({out_channels}) {
        if (stride != 1 && stride != 2) throw std::invalid_argument("conv stride must be 1 or 2");
    }

    void init(Rng& rng, T stddev) {
        for (auto& v : w.data) v = T(rng.normal()) * stddev;
        std::fill(b.data.begin(), b.data.end(), T(0));
    }

    static int out_size(int in, int stride) { return (in + stride - 1) / stride; }

    // Fills `col` (reused across calls to avoid reallocation) with the
    // im2col expansion of x under zero same-padding.
    void im2col(const TensorT<T>& x, TensorT<T>& col) const {
        const int bsz = x.dim(0), h = x.dim(1), wd = x.dim(2), c = x.dim(3);
        const int oh = out_size(h, stride), ow = out_size(wd, stride);
        const int pad_h = std::max((oh - 1) * stride + kKernel - h, 0) / 2;
        const int pad_w = std::max((ow - 1) * stride + kKernel - wd, 0) / 2;
        const int cols = kKernel * kKernel * c;
        const std::vector<int> want{bsz * oh * ow, cols};
        if (col.shape != want) col = TensorT<T>(want);
        parallel_for(0, int64_t(bsz) * oh, [&, this](int64_t lo, int64_t hi) {
            for (int64_t row = lo; row < hi; ++row) {
                const int bi = int(row / oh);
                const int oy = int(row % oh);
                for (int ky = 0; ky < kKernel; ++ky) {
                    const int iy = oy * stride - pad_h + ky;
                    const bool row_valid = iy >= 0 && iy < h;
                    const T* xrow = row_valid ? &x.at4(bi, iy, 0, 0) : nullptr;
                    for (int kx = 0; kx < kKernel; ++kx) {
                        T* dst = col.ptr() + (row * ow) * cols + (ky * kKernel + kx) * c;
                        for (int ox = 0; ox < ow; ++ox, dst += cols) {
                            const int ix = ox * stride - pad_w + kx;
                            if (!row_valid || ix < 0 || ix >= wd) {
                                for (int ci = 0; ci < c; ++ci) dst[ci] = T(0);
                            } else {
                                const T* src = xrow + int64_t(ix) * c;
                                for (int ci = 0; ci < c; ++ci) dst[ci] = src[ci];
                            }
                        }
                    }
                }
            }
        });
    }

    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        if (x.rank() != 4 || x.dim(3) != in_ch)
            throw std::invalid_argument("conv2d: input channel mismatch");
        const int bsz = x.dim(0);
        out_h = out_size(x.dim(1), stride);
        out_w = out_size(x.dim(2), stride);
        im2col(x, col_cache);
        const int rows = bsz * out_h * out_w;
        const int k = kKernel * kKernel * in_ch;
        TensorT<T> y({bsz, out_h, out_w, out_ch});
        gemm(col_cache.ptr(), w.ptr(), y.ptr(), rows, k, out_ch);
        parallel_for(0, rows, [&](int64_t lo, int64_t hi) {
            for (int64_t r = lo; r < hi; ++r) {
                T* yrow = y.ptr() + r * out_ch;
                for (int j = 0; j < out_ch; ++j) yrow[j] += b.data[size_t(j)];
            }
        });
        if (train) x_shape = x.shape;
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        const int bsz = x_shape[0], h = x_shape[1], wd = x_shape[2];
        const int rows = bsz * out_h * out_w;
        const int k = kKernel * kKernel * in_ch;
        if (gy.rank() != 4 || gy.dim(0) != bsz || gy.dim(1) != out_h || gy.dim(2) != out_w ||
            gy.dim(3) != out_ch)
            throw std::invalid_argument("conv2d backward: gradient shape mismatch");

        gemm_at(col_cache.ptr(), gy.ptr(), gw.ptr(), rows, k, out_ch);
        parallel_for(0, out_ch, [&](int64_t lo, int64_t hi) {
            for (int64_t j = lo; j < hi; ++j) {
                T s = T(0);
                for (int r = 0; r < rows; ++r) s += gy.ptr()[int64_t(r) * out_ch + j];
                gb.data[size_t(j)] = s;
            }
        });

        TensorT<T> wt({out_ch, k});
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < out_ch; ++j) wt.at2(j, i) = w.at2(i, j);
        const std::vector<int> gcol_shape{rows, k};
        if (gcol_scratch.shape != gcol_shape) gcol_scratch = TensorT<T>(gcol_shape);
        TensorT<T>& gcol = gcol_scratch;
        gemm(gy.ptr(), wt.ptr(), gcol.ptr(), rows, out_ch, k);

        const int pad_h = std::max((out_h - 1) * stride + kKernel - h, 0) / 2;
        const int pad_w = std::max((out_w - 1) * stride + kKernel - wd, 0) / 2;
        TensorT<T> gx({bsz, h, wd, in_ch});
        parallel_for(0, bsz, [&, this](int64_t lo, int64_t hi) {
            for (int64_t bi = lo; bi < hi; ++bi) {
                for (int oy = 0; oy < out_h; ++oy)
                    for (int ox = 0; ox < out_w; ++ox) {
                        const T* src =
                            gcol.ptr() + ((bi * out_h + oy) * out_w + ox) * int64_t(k);
                        for (int ky = 0; ky < kKernel; ++ky) {
                            const int iy = oy * stride - pad_h + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < kKernel; ++kx) {
                                const int ix = ox * stride - pad_w + kx;
                                if (ix < 0 || ix >= wd) continue;
                                const T* s = src + (ky * kKernel + kx) * in_ch;
                                T* dst = &gx.at4(int(bi), iy, ix, 0);
                                for (int ci = 0; ci < in_ch; ++ci) dst[ci] += s[ci];
                            }
                        }
                    }
            }
        });
        return gx;
    }
};

// Per-channel batch normalization over (batch, height, width) of an NHWC
// tensor. Train mode uses batch statistics (population variance, eps 1e-5)
// and folds them into the running estimates with momentum 0.8; inference
// uses the running estimates.
template <typename T>
struct BatchNormT {
    int channels;
    T momentum = T(0.8);
    T eps = T(1e-5);
    TensorT<T> gamma, beta, ggamma, gbeta;
    TensorT<T> run_mean, run_var;

    TensorT<T> xhat_cache;
    std::vector<T> inv_std_cache;

    explicit BatchNormT(int c)
        : channels(c),
          gamma({c}),
          beta({c}),
          ggamma({c}),
          gbeta({c}),
          run_mean({c}),
          run_var({c}) {
        std::fill(gamma.data.begin(), gamma.data.end(), T(1));
        std::fill(run_var.data.begin(), run_var.data.end(), T(1));
    }

    TensorT<T> forward(const TensorT<T>& x, bool train, bool update_running = true) {
        if (x.rank() != 4 || x.dim(3) != channels)
            throw std::invalid_argument("batchnorm: expected NHWC input with matching channels");
        const int64_t per_c = x.size() / channels;
        TensorT<T> y(x.shape);

        if (!train) {
            std::vector<T> scale(size_t(channels), T(0));
            std::vector<T> shift(size_t(channels), T(0));
            for (int c = 0; c < channels; ++c) {
                const T is = T(1) / std::sqrt(run_var.data[size_t(c)] + eps);
                scale[size_t(c)] = gamma.data[size_t(c)] * is;
                shift[size_t(c)] = beta.data[size_t(c)] - run_mean.data[size_t(c)] * scale[size_t(c)];
            }
            parallel_for(0, x.size() / channels, [&](int64_t lo, int64_t hi) {
                for (int64_t i = lo; i < hi; ++i) {
                    const T* xs = x.ptr() + i * channels;
                    T* ys = y.ptr() + i * channels;
                    for (int c = 0; c < channels; ++c)
                        ys[c] = xs[c] * scale[size_t(c)] + shift[size_t(c)];
                }
            });
            return y;
        }

        if (x.dim(0) < 2)
            throw std::invalid_argument("batchnorm: train mode needs batch size >= 2");

        std::vector<T> mean(size_t(channels), T(0)), var(size_t(channels), T(0));
        const T* xp = x.ptr();
        for (int64_t i = 0; i < per_c; ++i)
            for (int c = 0; c < channels; ++c) mean[size_t(c)] += xp[i * channels + c];
        for (auto& m : mean) m /= T(per_c);
        for (int64_t i = 0; i < per_c; ++i)
            for (int c = 0; c < channels; ++c) {
                const T d = xp[i * channels + c] - mean[size_t(c)];
                var[size_t(c)] += d * d;
            }
        for (auto& v : var) v /= T(per_c);

        inv_std_cache.resize(size_t(channels));
        for (int c = 0; c < channels; ++c)
            inv_std_cache[size_t(c)] = T(1) / std::sqrt(var[size_t(c)] + eps);

        xhat_cache = TensorT<T>(x.shape);
        parallel_for(0, per_c, [&](int64_t lo, int64_t hi) {
            for (int64_t i = lo; i < hi; ++i) {
                const T* xs = x.ptr() + i * channels;
                T* hs = xhat_cache.ptr() + i * channels;
                T* ys = y.ptr() + i * channels;
                for (int c = 0; c < channels; ++c) {
                    const T xh = (xs[c] - mean[size_t(c)]) * inv_std_cache[size_t(c)];
                    hs[c] = xh;
                    ys[c] = gamma.data[size_t(c)] * xh + beta.data[size_t(c)];
                }
            }
        });

        if (update_running)
            for (int c = 0; c < channels; ++c) {
                run_mean.data[size_t(c)] =
                    momentum * run_mean.data[size_t(c)] + (T(1) - momentum) * mean[size_t(c)];
                run_var.data[size_t(c)] =
                    momentum * run_var.data[size_t(c)] + (T(1) - momentum) * var[size_t(c)];
            }
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        require_same_shape(gy, xhat_cache, "batchnorm backward");
        const int64_t per_c = gy.size() / channels;
        std::vector<T> sum_dy(size_t(channels), T(0)), sum_dy_xhat(size_t(channels), T(0));
        const T* gp = gy.ptr();
        const T* hp = xhat_cache.ptr();
        for (int64_t i = 0; i < per_c; ++i)
            for (int c = 0; c < channels; ++c) {
                sum_dy[size_t(c)] += gp[i * channels + c];
                sum_dy_xhat[size_t(c)] += gp[i * channels + c] * hp[i * channels + c];
            }
        for (int c = 0; c < channels; ++c) {
            ggamma.data[size_t(c)] = sum_dy_xhat[size_t(c)];
            gbeta.data[size_t(c)] = sum_dy[size_t(c)];
        }
        TensorT<T> gx(gy.shape);
        const T inv_n = T(1) / T(per_c);
        parallel_for(0, per_c, [&](int64_t lo, int64_t hi) {
            for (int64_t i = lo; i < hi; ++i) {
                const T* gs = gy.ptr() + i * channels;
                const T* hs = xhat_cache.ptr() + i * channels;
                T* os = gx.ptr() + i * channels;
                for (int c = 0; c < channels; ++c) {
                    os[c] = gamma.data[size_t(c)] * inv_std_cache[size_t(c)] *
                            (gs[c] - inv_n * sum_dy[size_t(c)] -
                             hs[c] * inv_n * sum_dy_xhat[size_t(c)]);
                }
            }
        });
        return gx;
    }
};

// Elementwise map, parallel over disjoint ranges.
template <typename T, typename F>
TensorT<T> map_elements(const TensorT<T>& x, F&& f) {
    TensorT<T> y(x.shape);
    const T* xp = x.ptr();
    T* yp = y.ptr();
    parallel_for(0, x.size(), [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) yp[i] = f(xp[i]);
    });
    return y;
}

template <typename T, typename F>
TensorT<T> map_elements2(const TensorT<T>& a, const TensorT<T>& b, F&& f) {
    TensorT<T> y(a.shape);
    const T* ap = a.ptr();
    const T* bp = b.ptr();
    T* yp = y.ptr();
    parallel_for(0, a.size(), [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) yp[i] = f(ap[i], bp[i]);
    });
    return y;
}

template <typename T>
struct ReluT {
    TensorT<T> x_cache;
    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        TensorT<T> y = map_elements(x, [](T v) { return std::max(v, T(0)); });
        if (train) x_cache = x;
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        require_same_shape(gy, x_cache, "relu backward");
        return map_elements2(gy, x_cache, [](T g, T xv) { return xv > T(0) ? g : T(0); });
    }
};

template <typename T>
struct LeakyReluT {
    T alpha;
    TensorT<T> x_cache;
    explicit LeakyReluT(T a = T(0.2)) : alpha(a) {}
    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        const T al = alpha;
        TensorT<T> y = map_elements(x, [al](T v) { return v > T(0) ? v : al * v; });
        if (train) x_cache = x;
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        require_same_shape(gy, x_cache, "leaky_relu backward");
        const T al = alpha;
        return map_elements2(gy, x_cache, [al](T g, T xv) { return xv > T(0) ? g : al * g; });
    }
};

template <typename T>
struct TanhT {
    TensorT<T> y_cache;
    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        TensorT<T> y = map_elements(x, [](T v) { return std::tanh(v); });
        if (train) y_cache = y;
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        require_same_shape(gy, y_cache, "tanh backward");
        return map_elements2(gy, y_cache, [](T g, T yv) { return g * (T(1) - yv * yv); });
    }
};

template <typename T>
struct SigmoidT {
    TensorT<T> y_cache;
    TensorT<T> forward(const TensorT<T>& x, bool train = true) {
        TensorT<T> y = map_elements(x, [](T v) { return T(1) / (T(1) + std::exp(-v)); });
        if (train) y_cache = y;
        return y;
    }
    TensorT<T> backward(const TensorT<T>& gy) {
        require_same_shape(gy, y_cache, "sigmoid backward");
        return map_elements2(gy, y_cache, [](T g, T yv) { return g * yv * (T(1) - yv); });
    }
};

// Inverted dropout: kept units are scaled by 1/(1-rate) in train mode so
// inference is the identity. The mask comes from a caller-owned stream.
template <typename T>
struct DropoutT {
    T rate;
    std::vector<uint8_t> mask;
    explicit DropoutT(T r = T(0.25)) : rate(r) {}

    TensorT<T> forward(const TensorT<T>& x, bool train, Rng* rng) {
        if (!train) return x;
        if (!rng) throw std::invalid_argument("dropout: train mode needs an rng");
        const T scale = T(1) / (T(1) - rate);
        mask.resize(size_t(x.size()));
        TensorT<T> y(x.shape);
        for (int64_t i = 0; i < x.size(); ++i) {
            const bool keep = rng->uniform() >= double(rate);
            mask[size_t(i)] = keep ? 1 : 0;
            y.data[size_t(i)] = keep ? x.data[size_t(i)] * scale : T(0);
        }
        return y;
    }

    TensorT<T> backward(const TensorT<T>& gy) {
        if (mask.size() != size_t(gy.size()))
            throw std::invalid_argument("dropout backward: shape mismatch");
        const T scale = T(1) / (T(1) - rate);
        TensorT<T> gx(gy.shape);
        for (int64_t i = 0; i < gy.size(); ++i)
            gx.data[size_t(i)] = mask[size_t(i)] ? gy.data[size_t(i)] * scale : T(0);
        return gx;
    }
};

// Nearest-neighbor 2x upsampling; backward sums each 2x2 block.
template <typename T>
TensorT<T> upsample2x_forward(const TensorT<T>& x) {
    if (x.rank() != 4) throw std::invalid_argument("upsample2x: expected rank-4 input");
    const int b = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
    TensorT<T> y({b, 2 * h, 2 * w, c});
    parallel_for(0, int64_t(b) * h, [&](int64_t lo, int64_t hi) {
        for (int64_t row = lo; row < hi; ++row) {
            const int bi = int(row / h), yy = int(row % h);
            const T* src_row = &x.at4(bi, yy, 0, 0);
            T* dst0 = &y.at4(bi, 2 * yy, 0, 0);
            for (int xx = 0; xx < w; ++xx) {
                const T* s = src_row + int64_t(xx) * c;
                T* d = dst0 + int64_t(2 * xx) * c;
                for (int ci = 0; ci < c; ++ci) d[ci] = s[ci];
                for (int ci = 0; ci < c; ++ci) d[c + ci] = s[ci];
            }
            std::memcpy(&y.at4(bi, 2 * yy + 1, 0, 0), dst0, sizeof(T) * size_t(2 * w) * c);
        }
    });
    return y;
}

template <typename T>
TensorT<T> upsample2x_backward(const TensorT<T>& gy) {
    if (gy.rank() != 4 || gy.dim(1) % 2 != 0 || gy.dim(2) % 2 != 0)
        throw std::invalid_argument("upsample2x backward: bad shape");
    const int b = gy.dim(0), h = gy.dim(1) / 2, w = gy.dim(2) / 2, c = gy.dim(3);
    TensorT<T> gx({b, h, w, c});
    parallel_for(0, int64_t(b) * h, [&](int64_t lo, int64_t hi) {
        for (int64_t row = lo; row < hi; ++row) {
            const int bi = int(row / h), yy = int(row % h);
            const T* g0 = &gy.at4(bi, 2 * yy, 0, 0);
            const T* g1 = &gy.at4(bi, 2 * yy + 1, 0, 0);
            T* dst = &gx.at4(bi, yy, 0, 0);
            for (int xx = 0; xx < w; ++xx) {
                const int64_t o = int64_t(2 * xx) * c;
                T* d = dst + int64_t(xx) * c;
                for (int ci = 0; ci < c; ++ci)
                    d[ci] = (g0[o + ci] + g0[o + c + ci]) + (g1[o + ci] + g1[o + c + ci]);
            }
        }
    });
    return gx;
}

}  // namespace csi2img
