#include "kpplab/convolution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <mutex>

#include <fftw3.h>

#include "kpplab/error.hpp"

namespace kpplab {

namespace {
// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Convolver::FftPlan {
  std::size_t size = 0;
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  std::vector<std::complex<double>> kernel_spectrum;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit FftPlan(std::size_t n) : size(n) {
    std::lock_guard lock(planner_mutex());
    real = fftw_alloc_real(n);
    spectrum = fftw_alloc_complex(n / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spectrum, real, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spectrum);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

Convolver::Convolver(const Kernel& kernel, const Grid& grid, ConvolutionMethod method,
                     double tail, double tilt)
    : n_(grid.size()), method_(method) {
  const double radius = kernel.truncation_radius(tail, tilt);
  const double dx = grid.dx();
  half_width_ = static_cast<std::size_t>(std::ceil(radius / dx));
  if (static_cast<double>(half_width_) * dx > 0.5 * (grid.x_max() - grid.x_min()) + 1e-12) {
    throw Error(ErrorCode::grid_too_small,
                "kernel truncation radius " + std::to_string(radius) +
                    " exceeds the grid half-width");
  }
  const std::size_t width = 2 * half_width_ + 1;
  weights_.resize(width);
  double mass = 0.0;
  for (std::size_t j = 0; j < width; ++j) {
    const double y = (static_cast<double>(j) - static_cast<double>(half_width_)) * dx;
    weights_[j] = kernel.density(y) * dx;
    mass += weights_[j];
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::invalid_kernel, "kernel has no mass on the grid");
  for (std::size_t j = 0; j < width; ++j) {
    const double y = (static_cast<double>(j) - static_cast<double>(half_width_)) * dx;
    weights_[j] /= mass;
    if (tilt != 0.0) weights_[j] *= std::exp(tilt * y);
  }
  if (tilt != 0.0) {
    // Match the exact tilted mass; kinks in the density otherwise cost O(dx^2).
    const ExtendedReal log_tilted = kernel.log_laplace(tilt);
    const ExtendedReal log_mass = kernel.log_laplace(0.0);
    if (log_tilted.is_finite() && log_mass.is_finite()) {
      double sum = 0.0;
      for (double w : weights_) sum += w;
      const double factor = std::exp(log_tilted.value() - log_mass.value()) / sum;
      for (double& w : weights_) w *= factor;
    }
  }
  prefix_.assign(width + 1, 0.0);
  for (std::size_t j = 0; j < width; ++j) prefix_[j + 1] = prefix_[j] + weights_[j];

  if (method_ == ConvolutionMethod::fft) {
    fft_ = std::make_unique<FftPlan>(std::bit_ceil(n_ + 2 * half_width_));
    const std::size_t size = fft_->size;
    std::fill(fft_->real, fft_->real + size, 0.0);
    std::copy(weights_.begin(), weights_.end(), fft_->real);
    fftw_execute(fft_->forward);
    fft_->kernel_spectrum.resize(size / 2 + 1);
    for (std::size_t m = 0; m < size / 2 + 1; ++m) {
      fft_->kernel_spectrum[m] = {fft_->spectrum[m][0], fft_->spectrum[m][1]};
    }
  }
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

void Convolver::apply(std::span<const double> in, double left, double right,
                      std::span<double> out) const {
  const std::size_t n = n_;
  const std::size_t K = half_width_;
  const std::size_t width = 2 * K + 1;
  if (in.size() != n || out.size() != n) {
    throw Error(ErrorCode::domain, "convolution input does not match the grid");
  }

  // Mass of the kernel that reaches beyond either end of the grid.
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    if (left != 0.0 && i < K) acc += left * (prefix_[width] - prefix_[i + 1 + K]);
    if (right != 0.0 && i + K >= n) {
      const std::size_t upto = std::min(width, i + K + 1 - n);
      acc += right * prefix_[upto];
    }
    out[i] = acc;
  }

  if (method_ == ConvolutionMethod::direct) {
    for (std::size_t j = 0; j < width; ++j) {
      const double w = weights_[j];
      if (w == 0.0) continue;
      // k = j - K; valid i satisfy 0 <= i - k <= n - 1.
      const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(K);
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, k);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                                         static_cast<std::ptrdiff_t>(n) - 1 + k);
      double* o = out.data();
      const double* u = in.data() - k;
      for (std::ptrdiff_t i = lo; i <= hi; ++i) o[i] += w * u[i];
    }
    return;
  }

  FftPlan& p = *fft_;
  const std::size_t size = p.size;
  std::fill(p.real, p.real + size, 0.0);
  std::copy(in.begin(), in.end(), p.real);
  fftw_execute(p.forward);
  for (std::size_t m = 0; m < size / 2 + 1; ++m) {
    const std::complex<double> z{p.spectrum[m][0], p.spectrum[m][1]};
    const auto prod = z * p.kernel_spectrum[m];
    p.spectrum[m][0] = prod.real();
    p.spectrum[m][1] = prod.imag();
  }
  fftw_execute(p.backward);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < n; ++i) out[i] += p.real[i + K] * scale;
}

Field convolve(const Kernel& kernel, const Field& field, ConvolutionMethod method) {
  const Convolver conv(kernel, field.grid, method);
  Field out = field;
  conv.apply(field.values, field.left_limit, field.right_limit, out.values);
  // Limits are preserved because the normalized weights have unit mass.
  return out;
}

}  // namespace kpplab
