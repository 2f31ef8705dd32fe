#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <new>
#include <span>
#include <vector>

#include "pqsim/field.hpp"

namespace pqsim {

namespace detail {
// The FFTW planner is not reentrant; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}
}  // namespace detail

/// In-place complex DFT of fixed length on an owned, SIMD-aligned buffer.
///
/// forward() computes sum_n f_n exp(-2 pi i j n / N) and backward() the
/// conjugate sum, both unnormalized. Plans use FFTW_ESTIMATE so the chosen
/// algorithm, and hence every rounding error, is reproducible run to run.
class FourierTransform {
 public:
  explicit FourierTransform(std::size_t n) : n_(n) {
    data_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (data_ == nullptr) throw std::bad_alloc();
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_1d(len, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(len, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  ~FourierTransform() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(data_);
  }

  std::size_t size() const noexcept { return n_; }

  std::span<Complex> buffer() noexcept {
    return {reinterpret_cast<Complex*>(data_), n_};
  }

  void forward() noexcept { fftw_execute(forward_); }
  void backward() noexcept { fftw_execute(backward_); }

 private:
  std::size_t n_;
  fftw_complex* data_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

/// Unitary DFT: psi~_j = N^{-1/2} sum_n psi_n exp(-2 pi i j n / N), so that
/// sum |psi~|^2 == sum |psi|^2. Bin j carries wavenumber grid.wavenumbers()[j].
/// The phase exp(-i k_j x_min) of the continuous transform is not applied.
inline WaveField forward_dft(const WaveField& field) {
  if (field.representation() != Representation::position) {
    throw InvalidArgument("forward_dft expects a position-space field");
  }
  FourierTransform fft(field.size());
  auto buf = fft.buffer();
  std::ranges::copy(field.values(), buf.begin());
  fft.forward();
  const double scale = 1.0 / std::sqrt(static_cast<double>(field.size()));
  std::vector<Complex> out(buf.begin(), buf.end());
  for (auto& v : out) v *= scale;
  return WaveField(field.grid(), std::move(out), Representation::wavenumber);
}

inline WaveField inverse_dft(const WaveField& spectrum) {
  if (spectrum.representation() != Representation::wavenumber) {
    throw InvalidArgument("inverse_dft expects a wavenumber-space field");
  }
  FourierTransform fft(spectrum.size());
  auto buf = fft.buffer();
  std::ranges::copy(spectrum.values(), buf.begin());
  fft.backward();
  const double scale = 1.0 / std::sqrt(static_cast<double>(spectrum.size()));
  std::vector<Complex> out(buf.begin(), buf.end());
  for (auto& v : out) v *= scale;
  return WaveField(spectrum.grid(), std::move(out), Representation::position);
}

/// sum k_j |psi~_j|^2 / sum |psi~_j|^2 for a position-space field.
inline double mean_wavenumber(const WaveField& field) {
  const WaveField spec = forward_dft(field);
  const auto k = field.grid().wavenumbers();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    // The Nyquist bin is shared by +k_max and -k_max; leave it out of the mean.
    if (j == spec.size() / 2) {
      den += w;
      continue;
    }
    num += k[j] * w;
    den += w;
  }
  return num / den;
}

/// <T> = sum (A k_j^2) |psi~_j|^2 / sum |psi~_j|^2 with A the kinetic coefficient.
inline double mean_kinetic(const WaveField& field, double kinetic_coeff) {
  const WaveField spec = forward_dft(field);
  const auto k = field.grid().wavenumbers();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < spec.size(); ++j) {
    const double w = std::norm(spec[j]);
    num += kinetic_coeff * k[j] * k[j] * w;
    den += w;
  }
  return num / den;
}

}  // namespace pqsim
