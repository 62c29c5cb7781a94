#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace csi2img {

// Dense row-major tensor, rank 1..4. Layout for rank 4 is NHWC:
// (batch, height, width, channels). Float in production; the gradient
// checks instantiate the double variant.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
        data.assign(size_t(numel(shape)), T(0));
    }

    static int64_t numel(const std::vector<int>& s) {
        int64_t n = 1;
        for (const int d : s) {
            if (d < 1) throw std::invalid_argument("tensor dims must be >= 1");
            n *= d;
        }
        return n;
    }

    int64_t size() const { return int64_t(data.size()); }
    int rank() const { return int(shape.size()); }
    int dim(int i) const { return shape[size_t(i)]; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& at4(int b, int y, int x, int c) {
        return data[((size_t(b) * shape[1] + y) * shape[2] + x) * shape[3] + c];
    }
    const T& at4(int b, int y, int x, int c) const {
        return data[((size_t(b) * shape[1] + y) * shape[2] + x) * shape[3] + c];
    }

    T& at2(int r, int c) { return data[size_t(r) * shape[1] + c]; }
    const T& at2(int r, int c) const { return data[size_t(r) * shape[1] + c]; }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (const T v : data)
            if (!std::isfinite(double(v))) return false;
        return true;
    }

    TensorT reshaped(std::vector<int> new_shape) const {
        if (numel(new_shape) != size())
            throw std::invalid_argument("reshape: element count mismatch");
        TensorT out;
        out.shape = std::move(new_shape);
        out.data = data;
        return out;
    }
};

using Tensor = TensorT<float>;

template <typename T>
void require_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* what) {
    if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

template <typename T>
void require_finite(const TensorT<T>& t, const char* what) {
    if (!t.all_finite())
        throw std::runtime_error(std::string(what) + ": non-finite values in tensor");
}

}  // namespace csi2img
