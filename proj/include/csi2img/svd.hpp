#pragma once

#include <vector>

#include "csi2img/cmat.hpp"

namespace csi2img {

// H = U diag(S) V^H with U (MxM) and V (NxN) unitary and S descending,
// length min(M, N).
struct SvdTriple {
    CMat u;
    std::vector<double> s;
    CMat v;
};

// One-sided Jacobi SVD for matrices up to 8x8. The zero matrix returns
// identity U and V by convention.
SvdTriple svd_small(const CMat& h);

}  // namespace csi2img
