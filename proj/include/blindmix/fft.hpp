#pragma once

#include "blindmix/types.hpp"

namespace blindmix::fft {

// In-place unitary DFT of length buf.size(): forward applies
// X_k = (1/sqrt(L)) sum_n x_n exp(-2*pi*i*n*k/L), inverse its conjugate
// transpose. Plans are cached per length and shared across threads;
// execution is thread safe.
void unitary_forward(cvec& buf);
void unitary_inverse(cvec& buf);

// In-place unnormalized Walsh-Hadamard transform (Sylvester ordering).
// Length must be a power of two. Self-adjoint up to the factor L.
void walsh_hadamard(cvec& buf);

bool is_pow2(int v);

}  // namespace blindmix::fft
