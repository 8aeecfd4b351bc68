#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "kpplab/field.hpp"
#include "kpplab/kernel.hpp"

namespace kpplab {

enum class ConvolutionMethod {
  fft,     // FFTW for the interior sum
  direct,  // explicit sum; keeps exact zeros and relative precision of small values
};

/// Discrete (a * u)(x_i) = sum_k w_k u(x_i - k dx) with w_k = a(k dx) dx
/// normalized to unit sum and truncated at the kernel's 1e-12 tail radius.
/// Values beyond the grid are the field's constant limits. A tilt t
/// multiplies the normalized weights by exp(t k dx).
///
/// An instance owns FFT scratch buffers; use one per thread.
class Convolver {
 public:
  Convolver(const Kernel& kernel, const Grid& grid, ConvolutionMethod method,
            double tail = 1e-12, double tilt = 0.0);
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;

  void apply(std::span<const double> in, double left, double right, std::span<double> out) const;

  std::size_t half_width() const { return half_width_; }
  const std::vector<double>& weights() const { return weights_; }
  ConvolutionMethod method() const { return method_; }

 private:
  struct FftPlan;

  std::size_t n_;
  std::size_t half_width_;
  std::vector<double> weights_;      // index k + half_width_
  std::vector<double> prefix_;       // prefix_[j] = sum of weights_[0..j)
  ConvolutionMethod method_;
  std::unique_ptr<FftPlan> fft_;
};

/// (a * u) with the fast-transform interior and explicit boundary sums.
Field convolve(const Kernel& kernel, const Field& field,
               ConvolutionMethod method = ConvolutionMethod::fft);

}  // namespace kpplab
