#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tauber {

enum class ConvMethod { Auto, Direct, Fft };

/// Inputs up to this length use the direct sum under ConvMethod::Auto.
inline constexpr std::size_t kDirectConvLimit = std::size_t{1} << 14;

/// Full linear convolution h * sum_i a[i] b[k - i], length a.size() + b.size() - 1.
std::vector<std::complex<double>> convolve(std::span<const std::complex<double>> a,
                                           std::span<const double> b, double h,
                                           ConvMethod method = ConvMethod::Auto);

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, double h,
                             ConvMethod method = ConvMethod::Auto);

/// Convolution with a centred kernel of odd length 2L+1, cropped to a.size() so that
/// out[i] = h * sum_{|j| <= L} a[i - j] kernel[L + j] (a is zero outside its range).
std::vector<std::complex<double>> convolve_same(std::span<const std::complex<double>> a,
                                                std::span<const double> kernel, double h,
                                                ConvMethod method = ConvMethod::Auto);

}  // namespace tauber
