#pragma once

#include <cstddef>

// Batch kernels for the 2-D inner loops: mixture densities over point grids
// and squared-exponential predictions over candidate pools. Scalar reference
// implementations always exist; an AVX2 variant is selected at runtime when
// the CPU supports it. Results agree with the scalar path to a few ulp
// (the vector path uses a polynomial exp), and values below ~1e-308 may
// flush to zero on the vector path.

namespace ceopt::kernels {

/// One weighted Gaussian-exponential term,
///   w * exp(-0.5 * (a*dx^2 + 2*b*dx*dy + c*dy^2)),  dx = x - mx, dy = y - my.
/// Mixture components fold the normalization constant into w; squared
/// exponential kernel rows use a = c = 1/l^2, b = 0, w = alpha * variance.
struct GaussTerm2 {
    double mx;
    double my;
    double a;
    double b;
    double c;
    double w;
};

/// out[j] = sum_i terms[i] evaluated at (xs[j], ys[j]), for j in [0, n).
/// Dispatches to the best available backend.
void weighted_exp_quad2(const double* xs, const double* ys, std::size_t n,
                        const GaussTerm2* terms, std::size_t n_terms, double* out);

// Direct entry points, used by the equivalence tests.
void weighted_exp_quad2_scalar(const double* xs, const double* ys, std::size_t n,
                               const GaussTerm2* terms, std::size_t n_terms, double* out);
#ifdef CEOPT_BUILD_AVX2
void weighted_exp_quad2_avx2(const double* xs, const double* ys, std::size_t n,
                             const GaussTerm2* terms, std::size_t n_terms, double* out);
/// Vectorized exp over a buffer; exposed for accuracy tests.
void exp_batch_avx2(const double* x, std::size_t n, double* out);
#endif

/// Name of the backend the dispatcher resolved to ("avx2" or "scalar").
/// Honors the CEOPT_KERNELS environment variable ("scalar" forces the
/// reference path), read once at first use.
const char* active_backend();

} // namespace ceopt::kernels
