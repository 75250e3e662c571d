#pragma once

#include "blindmix/types.hpp"

namespace blindmix {

// Dense complex kernels behind the Gaussian encoding matrices. The serial
// namespace holds the plain reference loops; the unqualified versions are
// OpenMP-parallel over output entries with identical per-entry arithmetic,
// so both produce bitwise-equal results (tests rely on that).

namespace serial {
// out_l = sum_n M[l,n] * x_n, M row-major rows x cols.
void cmatvec(const cvec& M, int rows, int cols, std::span<const cplx> x, std::span<cplx> out);
// out_n = sum_l conj(M[l,n]) * w_l.
void cmatvec_adj(const cvec& M, int rows, int cols, std::span<const cplx> w, std::span<cplx> out);
}  // namespace serial

void cmatvec(const cvec& M, int rows, int cols, std::span<const cplx> x, std::span<cplx> out);
void cmatvec_adj(const cvec& M, int rows, int cols, std::span<const cplx> w, std::span<cplx> out);

}  // namespace blindmix
