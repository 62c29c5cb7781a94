#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "csi2img/csi_codec.hpp"
#include "csi2img/rng.hpp"
#include "csi2img/svd.hpp"

using namespace csi2img;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle: builds the D_k and G_{l,k} factors as full MxM
// matrices straight from their definitions and multiplies them out in
// written order. The production path applies structured row updates, so the
// two routes share no code.
CMat oracle_d(int m, int k, const std::vector<double>& phis_k) {
    CMat d = CMat::identity(m);
    for (int i = k; i <= m - 1; ++i) d(i - 1, i - 1) = std::polar(1.0, phis_k[size_t(i - k)]);
    return d;
}

CMat oracle_g(int m, int k, int l, double psi) {
    CMat g = CMat::identity(m);
    g(k - 1, k - 1) = std::cos(psi);
    g(l - 1, l - 1) = std::cos(psi);
    g(k - 1, l - 1) = std::sin(psi);
    g(l - 1, k - 1) = -std::sin(psi);
    return g;
}

CMat oracle_reconstruct(const AngleSet& a, const AntennaConfig& cfg) {
    const int m = cfg.n_rx;
    const int n = cfg.n_tx;
    const int kmax = std::min(n, m - 1);
    CMat prod = CMat::identity(m);
    size_t phi_at = 0, psi_at = 0;
    for (int k = 1; k <= kmax; ++k) {
        std::vector<double> phis_k(a.phi.begin() + long(phi_at),
                                   a.phi.begin() + long(phi_at) + (m - k));
        phi_at += size_t(m - k);
        prod = prod.mul(oracle_d(m, k, phis_k));
        for (int l = k + 1; l <= m; ++l)
            prod = prod.mul(oracle_g(m, k, l, a.psi[psi_at++]).transpose_plain());
    }
    return prod.mul(CMat::identity_tall(m, n));
}

AngleSet random_angles(Rng& rng, const AntennaConfig& cfg, int b_phi = 6, int b_psi = 4) {
    AngleSet a;
    a.b_phi = b_phi;
    a.b_psi = b_psi;
    const int n = angle_count(cfg);
    for (int i = 0; i < n; ++i) {
        a.phi.push_back(rng.uniform(0.0, 2.0 * kPi * 0.999999));
        a.psi.push_back(rng.uniform(0.0, kPi / 2.0));
    }
    return a;
}

// Random matrix with orthonormal columns via the SVD of a Gaussian matrix.
SteeringMatrix random_orthonormal_3x2(Rng& rng) {
    CMat h(3, 2);
    for (auto& e : h.a) e = cdouble(rng.normal(), rng.normal());
    const SvdTriple svd = svd_small(h);
    CMat v(3, 2);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) v(r, c) = svd.u(r, c);
    return SteeringMatrix{std::move(v)};
}

}  // namespace

TEST_CASE("dequantize_phi codebook") {
    CHECK(dequantize_phi(0, 4) == doctest::Approx(kPi / 16.0).epsilon(1e-12));
    CHECK(dequantize_phi(0, 6) == doctest::Approx(kPi / 64.0).epsilon(1e-12));
    CHECK(dequantize_phi(8, 4) == doctest::Approx(kPi + kPi / 16.0).epsilon(1e-12));
    for (const int b : {4, 6})
        for (unsigned i = 0; i < (1u << b); ++i) {
            const double a = dequantize_phi(i, b);
            CHECK(a > 0.0);
            CHECK(a < 2.0 * kPi);
        }
    CHECK_THROWS_AS((void)dequantize_phi(16, 4), std::invalid_argument);
    CHECK_THROWS_AS((void)dequantize_phi(0, 5), std::invalid_argument);
}

TEST_CASE("dequantize_psi codebook") {
    CHECK(dequantize_psi(0, 2) == doctest::Approx(kPi / 16.0).epsilon(1e-12));
    CHECK(dequantize_psi(3, 2) == doctest::Approx(3.0 * kPi / 8.0 + kPi / 16.0).epsilon(1e-12));
    CHECK(dequantize_psi(0, 4) == doctest::Approx(kPi / 64.0).epsilon(1e-12));
    for (const int b : {2, 4})
        for (unsigned i = 0; i < (1u << b); ++i) {
            const double a = dequantize_psi(i, b);
            CHECK(a > 0.0);
            CHECK(a < kPi / 2.0);
        }
    CHECK_THROWS_AS((void)dequantize_psi(4, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)dequantize_psi(0, 3), std::invalid_argument);
}

TEST_CASE("quantizers: exact codewords, boundaries, ties") {
    CHECK(quantize_phi(kPi / 16.0, 4) == 0);
    CHECK(quantize_psi(kPi / 2.0, 2) == 3);  // nearest of the 4 codewords
    // 0 is equidistant from the first and last phi codewords on the circle;
    // ties go to the lower index.
    CHECK(quantize_phi(0.0, 4) == 0);
    CHECK(quantize_phi(0.0, 6) == 0);
    // quantize handles unreduced angles.
    CHECK(quantize_phi(kPi / 16.0 + 4.0 * kPi, 4) == 0);
}

TEST_CASE("codeword round-trip is the identity on every index") {
    for (const int b : {4, 6})
        for (unsigned k = 0; k < (1u << b); ++k) CHECK(quantize_phi(dequantize_phi(k, b), b) == k);
    for (const int b : {2, 4})
        for (unsigned k = 0; k < (1u << b); ++k) CHECK(quantize_psi(dequantize_psi(k, b), b) == k);
}

TEST_CASE("reconstruct_v: M=2 N=1 closed forms") {
    AntennaConfig cfg;
    cfg.n_rx = 2;
    cfg.n_tx = 1;
    AngleSet a;
    a.phi = {0.0};
    a.psi = {0.0};
    SteeringMatrix v = reconstruct_v(a, cfg);
    CHECK(std::abs(v.v(0, 0) - cdouble(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(v.v(1, 0)) < 1e-12);

    a.phi = {kPi / 2.0};
    a.psi = {kPi / 4.0};
    v = reconstruct_v(a, cfg);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(v.v(0, 0) - cdouble(0.0, inv_sqrt2)) < 1e-12);
    CHECK(std::abs(v.v(1, 0) - cdouble(inv_sqrt2, 0.0)) < 1e-12);
}

TEST_CASE("reconstruct_v matches the full matrix-product oracle") {
    Rng rng(7001);
    for (const auto& [m, n] : {std::pair{3, 2}, {2, 2}, {4, 2}, {4, 3}, {2, 1}}) {
        AntennaConfig cfg;
        cfg.n_rx = m;
        cfg.n_tx = n;
        for (int it = 0; it < 50; ++it) {
            const AngleSet a = random_angles(rng, cfg);
            const SteeringMatrix v = reconstruct_v(a, cfg);
            const CMat expect = oracle_reconstruct(a, cfg);
            CHECK((v.v - expect).frobenius_norm() < 1e-12);
        }
    }
}

TEST_CASE("reconstruct_v output is orthonormal with a real nonneg last row") {
    Rng rng(7002);
    AntennaConfig cfg;
    for (int it = 0; it < 500; ++it) {
        const SteeringMatrix v = reconstruct_v(random_angles(rng, cfg), cfg);
        CHECK(gram_defect(v.v) < 1e-6);
        for (int c = 0; c < cfg.n_tx; ++c) {
            CHECK(std::abs(v.v(cfg.n_rx - 1, c).imag()) < 1e-12);
            CHECK(v.v(cfg.n_rx - 1, c).real() >= -1e-12);
        }
    }
}

TEST_CASE("reconstruct_v rejects mismatched angle counts") {
    AntennaConfig cfg;
    AngleSet a;
    a.phi = {0.1, 0.2};
    a.psi = {0.1, 0.2, 0.3};
    CHECK_THROWS_AS((void)reconstruct_v(a, cfg), std::invalid_argument);
}

TEST_CASE("decompose_v: identity-like input needs no rotation") {
    SteeringMatrix v{CMat::identity_tall(3, 2)};
    const QuantizedAngleRecord rec = decompose_v(v, 6, 4);
    REQUIRE(rec.phi_indices.size() == 3);
    REQUIRE(rec.psi_indices.size() == 3);
    // Phase 0 quantizes to the first codeword by the tie rule; psi 0 to
    // index 0.
    for (const auto i : rec.phi_indices) CHECK(i == 0);
    for (const auto i : rec.psi_indices) CHECK(i == 0);
}

TEST_CASE("decompose_v recovers exact indices on codeword-exact input") {
    Rng rng(7003);
    AntennaConfig cfg;
    for (int it = 0; it < 200; ++it) {
        QuantizedAngleRecord rec;
        rec.b_phi = 6;
        rec.b_psi = 4;
        for (int i = 0; i < 3; ++i) {
            rec.phi_indices.push_back(uint16_t(rng.uniform_int(0, 63)));
            rec.psi_indices.push_back(uint16_t(rng.uniform_int(0, 15)));
        }
        const SteeringMatrix v = reconstruct_v(dequantize(rec), cfg);
        const QuantizedAngleRecord back = decompose_v(v, 6, 4);
        CHECK(back.phi_indices == rec.phi_indices);
        CHECK(back.psi_indices == rec.psi_indices);
    }
}

TEST_CASE("decompose_v round-trip error stays within the calibrated bounds") {
    Rng rng(7004);
    AntennaConfig cfg;
    double sum = 0.0, worst = 0.0;
    const int n = 300;
    for (int it = 0; it < n; ++it) {
        const SteeringMatrix v = random_orthonormal_3x2(rng);
        const SteeringMatrix norm = normalize_columns(v);
        const SteeringMatrix back = reconstruct_v(dequantize(decompose_v(v, 6, 4)), cfg);
        const double err = (back.v - norm.v).frobenius_norm();
        sum += err;
        worst = std::max(worst, err);
    }
    CHECK(sum / n < 0.0783);
    CHECK(worst < 0.15);
}

TEST_CASE("decompose_v rejects non-orthonormal input") {
    CMat bad(3, 2);
    bad(0, 0) = 1.0;
    bad(0, 1) = 1.0;  // parallel columns
    bad(1, 1) = 0.1;
    CHECK_THROWS_AS((void)decompose_v(SteeringMatrix{bad}, 6, 4), std::invalid_argument);
}

TEST_CASE("feature_vector: layout, bounds, errors") {
    AntennaConfig cfg;
    std::vector<SteeringMatrix> vs(52, SteeringMatrix{CMat::identity_tall(3, 2)});
    const CsiFeatureVector f = feature_vector(vs, cfg);
    REQUIRE(int(f.values.size()) == 312);
    for (size_t i = 0; i < f.values.size(); i += 6) {
        CHECK(f.values[i] == 1.0f);  // re of the (0,0) entry
        for (size_t j = 1; j < 6; ++j) CHECK(f.values[i + j] == 0.0f);
    }

    vs.pop_back();
    CHECK_THROWS_AS((void)feature_vector(vs, cfg), std::invalid_argument);
}

TEST_CASE("feature_vector entries stay in [-1, 1] and distinguish columns") {
    Rng rng(7005);
    AntennaConfig cfg;
    std::vector<SteeringMatrix> vs;
    for (int s = 0; s < 52; ++s) vs.push_back(reconstruct_v(random_angles(rng, cfg), cfg));
    const CsiFeatureVector f = feature_vector(vs, cfg);
    for (const float v : f.values) {
        CHECK(v <= 1.0f);
        CHECK(v >= -1.0f);
    }
    // Change one first-column entry -> the vector must change.
    auto vs2 = vs;
    AngleSet a = random_angles(rng, cfg);
    a.phi[0] += 0.5;
    vs2[10] = reconstruct_v(a, cfg);
    CHECK(feature_vector(vs2, cfg).values != f.values);
}
