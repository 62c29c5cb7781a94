#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "csi2img/tensor.hpp"

namespace csi2img {

// A named view onto one parameter tensor and its gradient buffer.
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
};

// Adam with bias correction. lr and beta1 follow the training setup for
// both networks; beta2/eps are the usual defaults.
struct Adam {
    float lr = 2e-4f;
    float beta1 = 0.5f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    int64_t step_count = 0;
    std::vector<Tensor> m, v;

    void bind(const std::vector<ParamRef>& params) {
        m.clear();
        v.clear();
        for (const auto& p : params) {
            m.emplace_back(p.value->shape);
            v.emplace_back(p.value->shape);
        }
        step_count = 0;
    }

    void step(const std::vector<ParamRef>& params) {
        if (m.size() != params.size()) throw std::invalid_argument("adam: state not bound");
        ++step_count;
        const double bc1 = 1.0 - std::pow(double(beta1), double(step_count));
        const double bc2 = 1.0 - std::pow(double(beta2), double(step_count));
        for (size_t pi = 0; pi < params.size(); ++pi) {
            Tensor& val = *params[pi].value;
            const Tensor& g = *params[pi].grad;
            if (!val.same_shape(g) || !val.same_shape(m[pi]))
                throw std::invalid_argument("adam: shape mismatch for " + params[pi].name);
            float* mv = m[pi].ptr();
            float* vv = v[pi].ptr();
            float* pv = val.ptr();
            const float* gv = g.ptr();
            for (int64_t i = 0; i < val.size(); ++i) {
                mv[i] = beta1 * mv[i] + (1.0f - beta1) * gv[i];
                vv[i] = beta2 * vv[i] + (1.0f - beta2) * gv[i] * gv[i];
                const double mhat = double(mv[i]) / bc1;
                const double vhat = double(vv[i]) / bc2;
                pv[i] -= float(double(lr) * mhat / (std::sqrt(vhat) + double(eps)));
            }
        }
    }
};

}  // namespace csi2img
