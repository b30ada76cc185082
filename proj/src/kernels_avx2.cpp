#include "ceopt/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

// AVX2 variants. exp is evaluated with the Cephes rational approximation
// (exp(r) = 1 + 2r P(r^2) / (Q(r^2) - r P(r^2)) after range reduction),
// accurate to ~1 ulp over the normal range. Inputs below the smallest
// normal exponent flush to zero instead of producing subnormals.

namespace ceopt::kernels {
namespace {

constexpr double kExpMax = 709.782712893383996;  // above: overflow to inf
constexpr double kExpMin = -708.396418532264106; // below: flush to zero

inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d xc = _mm256_min_pd(_mm256_set1_pd(kExpMax),
                                     _mm256_max_pd(_mm256_set1_pd(kExpMin), x));

    // r = x - n*ln2, n = round(x / ln2)
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, xc);
    r = _mm256_fnmadd_pd(n, c2, r);
    const __m256d rr = _mm256_mul_pd(r, r);

    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);

    const __m256d e = _mm256_add_pd(
        _mm256_set1_pd(1.0),
        _mm256_div_pd(_mm256_add_pd(px, px), _mm256_sub_pd(qx, px)));

    // scale by 2^n through the exponent field
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bias = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
    const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(bias, 52));
    __m256d result = _mm256_mul_pd(e, scale);

    const __m256d lo_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpMin), _CMP_LT_OQ);
    const __m256d hi_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpMax), _CMP_GT_OQ);
    result = _mm256_andnot_pd(lo_mask, result);
    result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                              hi_mask);
    return result;
}

} // namespace

void exp_batch_avx2(const double* x, std::size_t n, double* out) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(out + j, exp_pd(_mm256_loadu_pd(x + j)));
    }
    for (; j < n; ++j) {
        out[j] = x[j] < kExpMin ? 0.0 : std::exp(x[j]);
    }
}

void weighted_exp_quad2_avx2(const double* xs, const double* ys, std::size_t n,
                             const GaussTerm2* terms, std::size_t n_terms, double* out) {
    const __m256d minus_half = _mm256_set1_pd(-0.5);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d x = _mm256_loadu_pd(xs + j);
        const __m256d y = _mm256_loadu_pd(ys + j);
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n_terms; ++i) {
            const GaussTerm2& t = terms[i];
            const __m256d dx = _mm256_sub_pd(x, _mm256_set1_pd(t.mx));
            const __m256d dy = _mm256_sub_pd(y, _mm256_set1_pd(t.my));
            const __m256d cross = _mm256_mul_pd(dx, dy);
            __m256d q = _mm256_mul_pd(_mm256_set1_pd(t.c), _mm256_mul_pd(dy, dy));
            q = _mm256_fmadd_pd(_mm256_set1_pd(2.0 * t.b), cross, q);
            q = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_set1_pd(t.a), dx), dx, q);
            const __m256d e = exp_pd(_mm256_mul_pd(q, minus_half));
            acc = _mm256_fmadd_pd(_mm256_set1_pd(t.w), e, acc);
        }
        _mm256_storeu_pd(out + j, acc);
    }
    if (j < n) {
        weighted_exp_quad2_scalar(xs + j, ys + j, n - j, terms, n_terms, out + j);
    }
}

} // namespace ceopt::kernels
