#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace varq::detail {

/// In-place unnormalised inverse DFT, out[x] = sum_k in[k] e^{+2 pi i k.x / n},
/// over `howmany` contiguous arrays of shape `shape` (row-major).
void inverse_dft(std::complex<double>* data, const std::vector<int>& shape, std::size_t howmany);

}  // namespace varq::detail
