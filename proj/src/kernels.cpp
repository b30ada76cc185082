#include "ceopt/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ceopt::kernels {
namespace {

using KernelFn = void (*)(const double*, const double*, std::size_t,
                          const GaussTerm2*, std::size_t, double*);

struct Dispatch {
    KernelFn fn;
    const char* name;
};

Dispatch resolve() {
    const char* force = std::getenv("CEOPT_KERNELS");
    if (force != nullptr && std::strcmp(force, "scalar") == 0) {
        return {&weighted_exp_quad2_scalar, "scalar"};
    }
#ifdef CEOPT_BUILD_AVX2
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return {&weighted_exp_quad2_avx2, "avx2"};
    }
#endif
    return {&weighted_exp_quad2_scalar, "scalar"};
}

const Dispatch& dispatch() {
    static const Dispatch d = resolve();
    return d;
}

} // namespace

void weighted_exp_quad2(const double* xs, const double* ys, std::size_t n,
                        const GaussTerm2* terms, std::size_t n_terms, double* out) {
    dispatch().fn(xs, ys, n, terms, n_terms, out);
}

const char* active_backend() { return dispatch().name; }

} // namespace ceopt::kernels
