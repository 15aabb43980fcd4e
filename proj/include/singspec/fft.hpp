#pragma once

#include <complex>
#include <vector>

namespace singspec::fft {

/// In-place complex DFT, forward convention X_k = sum_t x_t e^{-2pi i tk/n}.
void forward(std::vector<std::complex<double>>& data);

/// In-place complex inverse DFT (unnormalized: inverse(forward(x)) = n*x).
void backward(std::vector<std::complex<double>>& data);

/// Circular autocorrelation of a real sequence via FFT:
/// out[tau] = sum_t x[t] * x[(t+tau) mod n].
std::vector<double> circular_autocorrelation(const std::vector<double>& x);

/// Linear cross-correlation c(tau) = sum_t a[t] b[t-tau] for tau in
/// [-(n-1), n-1], returned with index tau + (n-1). Zero-padded FFT.
std::vector<double> cross_correlation(const std::vector<double>& a,
                                      const std::vector<double>& b);

} // namespace singspec::fft
