#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace csi2img {

using cdouble = std::complex<double>;

// Dense row-major complex matrix. Everything in the codec path is at most
// 8x8, so no attempt at blocking or views.
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<cdouble> a;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

    cdouble& operator()(int r, int c) { return a[size_t(r) * cols + c]; }
    const cdouble& operator()(int r, int c) const { return a[size_t(r) * cols + c]; }

    static CMat identity(int n) {
        CMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    // The M x N matrix with ones on the main diagonal, zero elsewhere.
    static CMat identity_tall(int m, int n) {
        CMat out(m, n);
        const int d = m < n ? m : n;
        for (int i = 0; i < d; ++i) out(i, i) = 1.0;
        return out;
    }

    CMat mul(const CMat& other) const {
        if (cols != other.rows) throw std::invalid_argument("CMat::mul: shape mismatch");
        CMat out(rows, other.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                const cdouble v = (*this)(i, k);
                for (int j = 0; j < other.cols; ++j) out(i, j) += v * other(k, j);
            }
        return out;
    }

    CMat hermitian() const {
        CMat out(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    CMat transpose_plain() const {
        CMat out(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a) s += std::norm(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& v : a)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }
};

inline CMat operator-(const CMat& x, const CMat& y) {
    if (x.rows != y.rows || x.cols != y.cols)
        throw std::invalid_argument("CMat subtraction: shape mismatch");
    CMat out(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) out.a[i] = x.a[i] - y.a[i];
    return out;
}

// || V^H V - I ||_F, the column-orthonormality defect.
inline double gram_defect(const CMat& v) {
    const CMat g = v.hermitian().mul(v);
    return (g - CMat::identity(v.cols)).frobenius_norm();
}

}  // namespace csi2img
