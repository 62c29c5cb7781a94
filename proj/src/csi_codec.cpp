#include "csi2img/csi_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace csi2img {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_phi_width(int b_phi) {
    if (b_phi != 4 && b_phi != 6)
        throw std::invalid_argument("phi bit width must be 4 or 6, got " + std::to_string(b_phi));
}

void check_psi_width(int b_psi) {
    if (b_psi != 2 && b_psi != 4)
        throw std::invalid_argument("psi bit width must be 2 or 4, got " + std::to_string(b_psi));
}

double wrap_two_pi(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0.0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;
    return a;
}

// Distance on the circle, result in [0, pi].
double circular_distance(double a, double b) {
    double d = std::fabs(a - b);
    d = std::fmod(d, kTwoPi);
    return d > kPi ? kTwoPi - d : d;
}

// In-place left-multiply by D_k: rows k..M-1 (1-based) scaled by e^{j phi}.
// Row M always keeps diagonal 1.
void apply_phases(CMat& w, int k, const double* phis, int count, bool inverse) {
    for (int i = 0; i < count; ++i) {
        const double ph = inverse ? -phis[i] : phis[i];
        const cdouble f = std::polar(1.0, ph);
        const int row = (k - 1) + i;
        for (int c = 0; c < w.cols; ++c) w(row, c) *= f;
    }
}

// In-place left-multiply by G_{l,k}^T (transposed Givens):
//   row_k <- cos * row_k - sin * row_l
//   row_l <- sin * row_k + cos * row_l
void apply_givens_t(CMat& w, int k, int l, double psi) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    const int rk = k - 1;
    const int rl = l - 1;
    for (int col = 0; col < w.cols; ++col) {
        const cdouble vk = w(rk, col);
        const cdouble vl = w(rl, col);
        w(rk, col) = c * vk - s * vl;
        w(rl, col) = s * vk + c * vl;
    }
}

// In-place left-multiply by G_{l,k} (untransposed; zeroes entry (l, k)):
//   row_k <- cos * row_k + sin * row_l
//   row_l <- -sin * row_k + cos * row_l
void apply_givens(CMat& w, int k, int l, double psi) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    const int rk = k - 1;
    const int rl = l - 1;
    for (int col = 0; col < w.cols; ++col) {
        const cdouble vk = w(rk, col);
        const cdouble vl = w(rl, col);
        w(rk, col) = c * vk + s * vl;
        w(rl, col) = -s * vk + c * vl;
    }
}

}  // namespace

void AntennaConfig::validate() const {
    if (n_tx < 1) throw std::invalid_argument("n_tx must be >= 1");
    if (n_rx < n_tx) throw std::invalid_argument("n_rx must be >= n_tx");
    if (n_subcarriers < 1) throw std::invalid_argument("n_subcarriers must be >= 1");
}

int angle_count(const AntennaConfig& cfg) {
    cfg.validate();
    const int kmax = std::min(cfg.n_tx, cfg.n_rx - 1);
    int n = 0;
    for (int k = 1; k <= kmax; ++k) n += cfg.n_rx - k;
    return n;
}

double dequantize_phi(unsigned index, int b_phi) {
    check_phi_width(b_phi);
    if (index >= (1u << b_phi))
        throw std::invalid_argument("phi index " + std::to_string(index) +
                                    " out of range for " + std::to_string(b_phi) + " bits");
    return double(index) * kPi / double(1u << (b_phi - 1)) + kPi / double(1u << b_phi);
}

double dequantize_psi(unsigned index, int b_psi) {
    check_psi_width(b_psi);
    if (index >= (1u << b_psi))
        throw std::invalid_argument("psi index " + std::to_string(index) +
                                    " out of range for " + std::to_string(b_psi) + " bits");
    return double(index) * kPi / double(1u << (b_psi + 1)) + kPi / double(1u << (b_psi + 2));
}

// A higher index wins only by a margin above rounding noise, so codewords
// equidistant in exact arithmetic resolve to the lower index.
constexpr double kTieEps = 1e-12;

unsigned quantize_phi(double angle, int b_phi) {
    check_phi_width(b_phi);
    const double a = wrap_two_pi(angle);
    const unsigned n = 1u << b_phi;
    unsigned best = 0;
    double best_d = circular_distance(a, dequantize_phi(0, b_phi));
    for (unsigned k = 1; k < n; ++k) {
        const double d = circular_distance(a, dequantize_phi(k, b_phi));
        if (d < best_d - kTieEps) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

unsigned quantize_psi(double angle, int b_psi) {
    check_psi_width(b_psi);
    const double a = std::clamp(angle, 0.0, kPi / 2.0);
    const unsigned n = 1u << b_psi;
    unsigned best = 0;
    double best_d = std::fabs(a - dequantize_psi(0, b_psi));
    for (unsigned k = 1; k < n; ++k) {
        const double d = std::fabs(a - dequantize_psi(k, b_psi));
        if (d < best_d - kTieEps) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

AngleSet dequantize(const QuantizedAngleRecord& rec) {
    AngleSet out;
    out.b_phi = rec.b_phi;
    out.b_psi = rec.b_psi;
    out.phi.reserve(rec.phi_indices.size());
    out.psi.reserve(rec.psi_indices.size());
    for (const uint16_t i : rec.phi_indices) out.phi.push_back(dequantize_phi(i, rec.b_phi));
    for (const uint16_t i : rec.psi_indices) out.psi.push_back(dequantize_psi(i, rec.b_psi));
    return out;
}

SteeringMatrix reconstruct_v(const AngleSet& angles, const AntennaConfig& cfg) {
    cfg.validate();
    const int m = cfg.n_rx;
    const int n = cfg.n_tx;
    const int kmax = std::min(n, m - 1);
    const int expected = angle_count(cfg);
    if (int(angles.phi.size()) != expected || int(angles.psi.size()) != expected)
        throw std::invalid_argument("angle count mismatch: expected " + std::to_string(expected) +
                                    " phi and psi, got " + std::to_string(angles.phi.size()) +
                                    "/" + std::to_string(angles.psi.size()));

    // Offset of block k in the flat angle arrays.
    auto block_offset = [m](int k) {
        int off = 0;
        for (int kk = 1; kk < k; ++kk) off += m - kk;
        return off;
    };

    CMat w = CMat::identity_tall(m, n);
    // The factors multiply I~ right to left: highest k first, and within a
    // block the Givens transposes before D_k (D_k is leftmost in the block).
    for (int k = kmax; k >= 1; --k) {
        const int off = block_offset(k);
        for (int l = m; l >= k + 1; --l) apply_givens_t(w, k, l, angles.psi[off + (l - k - 1)]);
        apply_phases(w, k, angles.phi.data() + off, m - k, /*inverse=*/false);
    }
    return SteeringMatrix{std::move(w)};
}

SteeringMatrix normalize_columns(const SteeringMatrix& v) {
    CMat w = v.v;
    const int last = w.rows - 1;
    for (int c = 0; c < w.cols; ++c) {
        const cdouble bottom = w(last, c);
        if (std::abs(bottom) < 1e-12) continue;
        const cdouble f = std::polar(1.0, -std::arg(bottom));
        for (int r = 0; r < w.rows; ++r) w(r, c) *= f;
    }
    return SteeringMatrix{std::move(w)};
}

AngleSet extract_givens_angles(const SteeringMatrix& v) {
    CMat w = v.v;
    const int m = w.rows;
    const int n = w.cols;
    const int kmax = std::min(n, m - 1);

    AngleSet out;
    for (int k = 1; k <= kmax; ++k) {
        // Column k phases, rows k..M-1 (the last row stays untouched and must
        // already be real from normalization / previous sweeps).
        std::vector<double> phis(size_t(m - k));
        for (int i = k; i <= m - 1; ++i) {
            const cdouble e = w(i - 1, k - 1);
            double ph = std::abs(e) < 1e-12 ? 0.0 : std::arg(e);
            ph = wrap_two_pi(ph);
            phis[size_t(i - k)] = ph;
            out.phi.push_back(ph);
        }
        apply_phases(w, k, phis.data(), m - k, /*inverse=*/true);

        for (int l = k + 1; l <= m; ++l) {
            const double pivot = w(k - 1, k - 1).real();
            const double target = w(l - 1, k - 1).real();
            double psi = std::atan2(std::max(target, 0.0), std::max(pivot, 0.0));
            psi = std::clamp(psi, 0.0, kPi / 2.0);
            out.psi.push_back(psi);
            apply_givens(w, k, l, psi);
        }
    }
    return out;
}

QuantizedAngleRecord decompose_v(const SteeringMatrix& v, int b_phi, int b_psi) {
    check_phi_width(b_phi);
    check_psi_width(b_psi);
    const double defect = gram_defect(v.v);
    if (!(defect <= 1e-4))
        throw std::invalid_argument("decompose_v: columns not orthonormal (Gram defect " +
                                    std::to_string(defect) + ")");

    const AngleSet angles = extract_givens_angles(normalize_columns(v));
    QuantizedAngleRecord rec;
    rec.b_phi = b_phi;
    rec.b_psi = b_psi;
    rec.phi_indices.reserve(angles.phi.size());
    rec.psi_indices.reserve(angles.psi.size());
    for (const double a : angles.phi) rec.phi_indices.push_back(uint16_t(quantize_phi(a, b_phi)));
    for (const double a : angles.psi) rec.psi_indices.push_back(uint16_t(quantize_psi(a, b_psi)));
    return rec;
}

CsiFeatureVector feature_vector(const std::vector<SteeringMatrix>& v_per_subcarrier,
                                const AntennaConfig& cfg) {
    cfg.validate();
    if (int(v_per_subcarrier.size()) != cfg.n_subcarriers)
        throw std::invalid_argument("feature_vector: expected " +
                                    std::to_string(cfg.n_subcarriers) + " matrices, got " +
                                    std::to_string(v_per_subcarrier.size()));
    CsiFeatureVector out;
    out.values.reserve(size_t(cfg.feature_length()));
    for (const auto& sm : v_per_subcarrier) {
        if (sm.v.rows != cfg.n_rx || sm.v.cols != cfg.n_tx)
            throw std::invalid_argument("feature_vector: steering matrix shape mismatch");
        for (int r = 0; r < cfg.n_rx; ++r) {
            const cdouble e = sm.v(r, 0);
            out.values.push_back(float(e.real()));
            out.values.push_back(float(e.imag()));
        }
    }
    return out;
}

}  // namespace csi2img
