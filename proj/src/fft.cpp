#include "blindmix/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace blindmix::fft {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// Plan creation is not thread safe in FFTW; executing a cached plan on a new
// array is. FFTW_ESTIMATE keeps plan selection independent of runtime timing
// so repeated runs produce bitwise-identical transforms.
PlanPair& plans_for(int L) {
    static std::map<int, PlanPair> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(L);
    if (it != cache.end()) return it->second;

    cvec scratch(static_cast<size_t>(L));
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    PlanPair pp;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    pp.fwd = fftw_plan_dft_1d(L, p, p, FFTW_FORWARD, flags);
    pp.bwd = fftw_plan_dft_1d(L, p, p, FFTW_BACKWARD, flags);
    return cache.emplace(L, pp).first->second;
}

void scale(cvec& buf, double a) {
    for (cplx& v : buf) v *= a;
}

}  // namespace

void unitary_forward(cvec& buf) {
    const int L = static_cast<int>(buf.size());
    if (L == 0) throw DimensionError("unitary_forward: empty buffer");
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(plans_for(L).fwd, p, p);
    scale(buf, 1.0 / std::sqrt(static_cast<double>(L)));
}

void unitary_inverse(cvec& buf) {
    const int L = static_cast<int>(buf.size());
    if (L == 0) throw DimensionError("unitary_inverse: empty buffer");
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_execute_dft(plans_for(L).bwd, p, p);
    scale(buf, 1.0 / std::sqrt(static_cast<double>(L)));
}

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

void walsh_hadamard(cvec& buf) {
    const int L = static_cast<int>(buf.size());
    if (!is_pow2(L)) throw DimensionError("walsh_hadamard: length must be a power of two");
    for (int half = 1; half < L; half <<= 1) {
        for (int base = 0; base < L; base += half << 1) {
            for (int j = base; j < base + half; ++j) {
                const cplx a = buf[j];
                const cplx b = buf[j + half];
                buf[j] = a + b;
                buf[j + half] = a - b;
            }
        }
    }
}

}  // namespace blindmix::fft
