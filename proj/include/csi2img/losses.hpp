#pragma once

#include <cmath>

#include "csi2img/tensor.hpp"

namespace csi2img {

template <typename T>
struct LossResult {
    double value = 0.0;
    TensorT<T> grad;  // d(loss)/d(prediction)
};

// Mean squared error over all elements.
template <typename T>
LossResult<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target) {
    require_same_shape(pred, target, "mse_loss");
    LossResult<T> out;
    out.grad = TensorT<T>(pred.shape);
    const double inv_n = 1.0 / double(pred.size());
    double acc = 0.0;
    for (int64_t i = 0; i < pred.size(); ++i) {
        const double d = double(pred.data[size_t(i)]) - double(target.data[size_t(i)]);
        acc += d * d;
        out.grad.data[size_t(i)] = T(2.0 * d * inv_n);
    }
    out.value = acc * inv_n;
    return out;
}

// Binary cross-entropy on probabilities, clamped to [1e-7, 1 - 1e-7] so the
// loss and gradient stay finite for saturated predictions.
template <typename T>
LossResult<T> bce_loss(const TensorT<T>& prob, const TensorT<T>& label) {
    require_same_shape(prob, label, "bce_loss");
    LossResult<T> out;
    out.grad = TensorT<T>(prob.shape);
    const double inv_n = 1.0 / double(prob.size());
    const double lo = 1e-7, hi = 1.0 - 1e-7;
    double acc = 0.0;
    for (int64_t i = 0; i < prob.size(); ++i) {
        const double p = std::clamp(double(prob.data[size_t(i)]), lo, hi);
        const double y = double(label.data[size_t(i)]);
        acc -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        out.grad.data[size_t(i)] = T((p - y) / (p * (1.0 - p)) * inv_n);
    }
    out.value = acc * inv_n;
    return out;
}

// BCE against a constant label (the REAL/FAKE targets of adversarial steps).
template <typename T>
LossResult<T> bce_loss_const(const TensorT<T>& prob, T label) {
    TensorT<T> target(prob.shape);
    std::fill(target.data.begin(), target.data.end(), label);
    return bce_loss(prob, target);
}

}  // namespace csi2img
