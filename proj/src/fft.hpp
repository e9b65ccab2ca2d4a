// Thin wrapper over FFTW plans shared across threads.
#pragma once

#include <complex>
#include <span>

namespace chirplayer::detail {

/// Forward, unnormalized DFT of `in` into `out` (same power-of-two length, no aliasing).
/// Safe to call concurrently: plans are created once per length under a lock and
/// executed through the new-array interface.
void fft_forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

}  // namespace chirplayer::detail
