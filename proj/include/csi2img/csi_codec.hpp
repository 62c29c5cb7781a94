#pragma once

#include <cstdint>
#include <vector>

#include "csi2img/cmat.hpp"

namespace csi2img {

// Antenna/subcarrier geometry of the feedback link.
struct AntennaConfig {
    int n_tx = 2;          // N
    int n_rx = 3;          // M
    int n_subcarriers = 52;

    void validate() const;
    int feature_length() const { return n_subcarriers * n_rx * 2; }
};

// Givens angles for one subcarrier, radians.
//
// Ordering is k-major: for k = 1..min(N, M-1) first the column-phase angles
// phi_{k,k}..phi_{M-1,k}, and in `psi` the rotation angles
// psi_{k+1,k}..psi_{M,k}. One psi per Givens pair: the inner product over l
// carries psi_{l,k}, which is the only reading that matches the angle count
// of the feedback format (flagged in the README).
struct AngleSet {
    std::vector<double> phi;  // each in [0, 2*pi)
    std::vector<double> psi;  // each in [0, pi/2]
    int b_phi = 6;
    int b_psi = 4;
};

// Wire form of AngleSet: quantizer indices.
struct QuantizedAngleRecord {
    std::vector<uint16_t> phi_indices;
    std::vector<uint16_t> psi_indices;
    int b_phi = 6;
    int b_psi = 4;
};

// Complex M x N matrix with orthonormal columns; the last row is real and
// nonnegative after normalize_columns().
struct SteeringMatrix {
    CMat v;
};

// Network input: per subcarrier the first column of V, interleaved
// (re, im) per receive antenna. Length 312 for the default config.
struct CsiFeatureVector {
    std::vector<float> values;
};

// Number of phi angles (== number of psi angles) for a config.
int angle_count(const AntennaConfig& cfg);

// Angle codebooks. phi: index*pi/2^(b-1) + pi/2^b with b in {4, 6}.
// psi: index*pi/2^(b+1) + pi/2^(b+2) with b in {2, 4}.
double dequantize_phi(unsigned index, int b_phi);
double dequantize_psi(unsigned index, int b_psi);

// Nearest-codeword inverses. phi is compared on the circle (distance mod
// 2*pi), psi on the line after clamping to [0, pi/2]. Ties break toward the
// lower index.
unsigned quantize_phi(double angle, int b_phi);
unsigned quantize_psi(double angle, int b_psi);

AngleSet dequantize(const QuantizedAngleRecord& rec);

// V = { prod_{k=1}^{min(N,M-1)} [ D_k prod_{l=k+1}^{M} G_{l,k}^T(psi_{l,k}) ] } I~_{MxN}
// with the k product applied left to right in increasing k and l increasing
// within k.
SteeringMatrix reconstruct_v(const AngleSet& angles, const AntennaConfig& cfg);

// Phase-normalizes so the last row is real nonnegative (per-column phase
// gauge; this is the only freedom the angle format cannot represent).
SteeringMatrix normalize_columns(const SteeringMatrix& v);

// Exact inverse of reconstruct_v on normalized input: peels phases
// column-by-column and zeroes sub-diagonal entries with Givens rotations in
// the same (k, l) order.
AngleSet extract_givens_angles(const SteeringMatrix& v);

// normalize -> extract -> quantize. Input must have orthonormal columns
// (Gram defect <= 1e-4).
QuantizedAngleRecord decompose_v(const SteeringMatrix& v, int b_phi, int b_psi);

CsiFeatureVector feature_vector(const std::vector<SteeringMatrix>& v_per_subcarrier,
                                const AntennaConfig& cfg);

}  // namespace csi2img
