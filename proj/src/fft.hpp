#pragma once

#include <complex>
#include <vector>

namespace wbgsec::detail {

/// In-place iterative radix-2 FFT. Size must be a power of two.
/// Twiddle tables are cached per thread, so concurrent callers never share
/// mutable state.
void fft_inplace(std::vector<std::complex<double>>& data);

}  // namespace wbgsec::detail
