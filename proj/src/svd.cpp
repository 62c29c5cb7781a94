#include "csi2img/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csi2img {

namespace {

double column_norm_sq(const CMat& b, int col) {
    double s = 0.0;
    for (int i = 0; i < b.rows; ++i) s += std::norm(b(i, col));
    return s;
}

cdouble column_dot(const CMat& b, int p, int q) {
    cdouble s = 0.0;
    for (int i = 0; i < b.rows; ++i) s += std::conj(b(i, p)) * b(i, q);
    return s;
}

// Right-multiplies columns (p, q) of m by the unitary
//   [  c           s*e^{i phase} ]
//   [ -s*e^{-i phase}   c        ]
void rotate_columns(CMat& m, int p, int q, double c, double s, double phase) {
    const cdouble ep = std::polar(1.0, phase);
    const cdouble em = std::conj(ep);
    for (int i = 0; i < m.rows; ++i) {
        const cdouble vp = m(i, p);
        const cdouble vq = m(i, q);
        m(i, p) = c * vp - s * em * vq;
        m(i, q) = s * ep * vp + c * vq;
    }
}

// Orthonormal completion: appends unit columns orthogonal to `cols` until
// there are `target` of them, drawing candidates from the standard basis.
void complete_basis(std::vector<std::vector<cdouble>>& cols, int dim, int target) {
    for (int e = 0; e < dim && int(cols.size()) < target; ++e) {
        std::vector<cdouble> v(size_t(dim), 0.0);
        v[size_t(e)] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {  // twice for stability
            for (const auto& u : cols) {
                cdouble proj = 0.0;
                for (int i = 0; i < dim; ++i) proj += std::conj(u[size_t(i)]) * v[size_t(i)];
                for (int i = 0; i < dim; ++i) v[size_t(i)] -= proj * u[size_t(i)];
            }
        }
        double nrm = 0.0;
        for (const auto& x : v) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-7) continue;
        for (auto& x : v) x /= nrm;
        cols.push_back(std::move(v));
    }
}

}  // namespace

SvdTriple svd_small(const CMat& h) {
    if (h.rows < 1 || h.cols < 1 || h.rows > 8 || h.cols > 8)
        throw std::invalid_argument("svd_small: dimensions must be within 1..8");
    if (!h.all_finite()) throw std::invalid_argument("svd_small: non-finite entries");

    if (h.rows < h.cols) {
        SvdTriple t = svd_small(h.hermitian());
        return SvdTriple{std::move(t.v), std::move(t.s), std::move(t.u)};
    }

    const int m = h.rows;
    const int n = h.cols;
    CMat b = h;
    CMat v = CMat::identity(n);

    const double scale = h.frobenius_norm();
    const double tol = 1e-14;
    for (int sweep = 0; sweep < 60 && scale > 0.0; ++sweep) {
        bool converged = true;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double app = column_norm_sq(b, p);
                const double aqq = column_norm_sq(b, q);
                const cdouble apq = column_dot(b, p, q);
                const double mag = std::abs(apq);
                if (mag <= tol * std::sqrt(app * aqq) + 1e-300) continue;
                converged = false;
                const double phase = std::arg(apq);
                const double zeta = (aqq - app) / (2.0 * mag);
                const double t =
                    (zeta >= 0.0 ? 1.0 : -1.0) / (std::fabs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate_columns(b, p, q, c, s, phase);
                rotate_columns(v, p, q, c, s, phase);
            }
        }
        if (converged) break;
    }

    std::vector<double> sigma(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) sigma[size_t(j)] = std::sqrt(column_norm_sq(b, j));

    std::vector<int> order(static_cast<size_t>(n), 0);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&sigma](int a, int c) { return sigma[size_t(a)] > sigma[size_t(c)]; });

    SvdTriple out;
    out.s.resize(size_t(n));
    out.v = CMat(n, n);
    CMat bs(m, n);
    for (int j = 0; j < n; ++j) {
        const int src = order[size_t(j)];
        out.s[size_t(j)] = sigma[size_t(src)];
        for (int i = 0; i < n; ++i) out.v(i, j) = v(i, src);
        for (int i = 0; i < m; ++i) bs(i, j) = b(i, src);
    }

    const double rank_eps = std::max(m, n) * scale * 1e-15;
    std::vector<std::vector<cdouble>> ucols;
    ucols.reserve(size_t(m));
    for (int j = 0; j < n; ++j) {
        if (out.s[size_t(j)] <= rank_eps) break;  // descending, rest are null
        std::vector<cdouble> col(static_cast<size_t>(m), cdouble{});
        for (int i = 0; i < m; ++i) col[size_t(i)] = bs(i, j) / out.s[size_t(j)];
        ucols.push_back(std::move(col));
    }
    const int rank = int(ucols.size());
    complete_basis(ucols, m, m);

    out.u = CMat(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) out.u(i, j) = ucols[size_t(j)][size_t(i)];
    (void)rank;
    return out;
}

}  // namespace csi2img
