#ifndef BBPN_FFT_HPP
#define BBPN_FFT_HPP

#include <complex>
#include <vector>

namespace bbpn {

/// In-place iterative radix-2 transform. Size must be a power of two.
/// The inverse includes the 1/N normalization.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

}  // namespace bbpn

#endif  // BBPN_FFT_HPP
