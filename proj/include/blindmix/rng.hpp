#pragma once

#include <cstdint>

#include "blindmix/types.hpp"

namespace blindmix::rng {

// splitmix64 step; also the workhorse for key derivation below.
uint64_t splitmix64(uint64_t& state);

// Hash-combines a master seed with up to three stream labels. Used for
// per-source, per-cell and per-trial streams so parallel work stays
// reproducible no matter how it is scheduled.
uint64_t derive(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0);

// xoshiro256++ with all draw logic pinned in this codebase (no reliance on
// standard-library distributions, which are implementation defined).
class Stream {
  public:
    explicit Stream(uint64_t key);

    uint64_t next_u64();
    double next_unit();        // uniform on [0,1)
    double next_unit_open();   // uniform on (0,1], safe for log()
    double next_gaussian();    // N(0,1), Box-Muller
    cplx next_cgaussian();     // CN(0,1): variance 1/2 per real component
    int next_sign();           // +1 or -1, equiprobable

    void fill_cgaussian(std::span<cplx> out);

  private:
    uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace blindmix::rng
