#include "ceopt/kernels.hpp"

#include <cmath>

namespace ceopt::kernels {

void weighted_exp_quad2_scalar(const double* xs, const double* ys, std::size_t n,
                               const GaussTerm2* terms, std::size_t n_terms, double* out) {
    for (std::size_t j = 0; j < n; ++j) {
        const double x = xs[j];
        const double y = ys[j];
        double acc = 0.0;
        for (std::size_t i = 0; i < n_terms; ++i) {
            const GaussTerm2& t = terms[i];
            const double dx = x - t.mx;
            const double dy = y - t.my;
            const double q = t.a * dx * dx + 2.0 * t.b * dx * dy + t.c * dy * dy;
            acc += t.w * std::exp(-0.5 * q);
        }
        out[j] = acc;
    }
}

} // namespace ceopt::kernels
