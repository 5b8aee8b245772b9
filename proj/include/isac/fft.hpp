#pragma once

#include <cstddef>
#include <vector>

#include "isac/units.hpp"

namespace isac::fft {

// Thin wrappers over FFTW. Plans are cached per (size, direction) behind a mutex;
// execution is reentrant so callers may run transforms from several threads.

/// In-place unnormalized forward DFT: X[m] = sum_k x[k] e^{-j 2 pi k m / n}.
void forward(cplx* data, std::size_t n);
/// In-place unnormalized inverse DFT (no 1/n factor).
void inverse(cplx* data, std::size_t n);

inline void forward(std::vector<cplx>& v) { forward(v.data(), v.size()); }
inline void inverse(std::vector<cplx>& v) { inverse(v.data(), v.size()); }

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

} // namespace isac::fft
