#include "patchlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "patchlab/parallel.hpp"

namespace patchlab::spectral {

namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

// FFTW's planner is not reentrant; execution on fresh arrays is.
std::mutex g_plan_mutex;

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

template <class T>
FftwBuffer<T> make_buffer(std::size_t count) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * count)));
}

const Plans& plans_for(std::size_t n) {
  static std::map<std::size_t, Plans> cache;
  std::lock_guard lock(g_plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = make_buffer<double>(n);
  auto cplx = make_buffer<fftw_complex>(n / 2 + 1);
  Plans p;
  int ni = static_cast<int>(n);
  p.r2c = fftw_plan_dft_r2c_1d(ni, real.get(), cplx.get(), FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_1d(ni, cplx.get(), real.get(), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

void require_even(std::size_t n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("spectral operators need an even sample count");
}

}  // namespace

Coefficients forward(std::span<const double> f) {
  const std::size_t n = f.size();
  require_even(n);
  const Plans& p = plans_for(n);
  auto in = make_buffer<double>(n);
  auto out = make_buffer<fftw_complex>(n / 2 + 1);
  std::copy(f.begin(), f.end(), in.get());
  fftw_execute_dft_r2c(p.r2c, in.get(), out.get());
  Coefficients c(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) c[k] = {out[k][0], out[k][1]};
  return c;
}

std::vector<double> inverse(const Coefficients& c, std::size_t n) {
  require_even(n);
  if (c.size() != n / 2 + 1) throw std::invalid_argument("coefficient count mismatch");
  const Plans& p = plans_for(n);
  auto in = make_buffer<fftw_complex>(n / 2 + 1);
  auto out = make_buffer<double>(n);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    in[k][0] = c[k].real();
    in[k][1] = c[k].imag();
  }
  // The c2r transform reads only the real part of the DC and Nyquist bins.
  in[0][1] = 0.0;
  in[n / 2][1] = 0.0;
  fftw_execute_dft_c2r(p.c2r, in.get(), out.get());
  std::vector<double> f(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = out[j] * scale;
  return f;
}

std::vector<double> derivative(std::span<const double> f) {
  const std::size_t half = f.size() / 2;
  return apply(f, [half](std::size_t k) -> std::complex<double> {
    if (k == half) return 0.0;
    return {0.0, static_cast<double>(k)};
  });
}

std::vector<double> hilbert(std::span<const double> f) {
  const std::size_t half = f.size() / 2;
  return apply(f, [half](std::size_t k) -> std::complex<double> {
    if (k == 0 || k == half) return 0.0;
    return {0.0, -1.0};
  });
}

std::vector<double> log_kernel(std::span<const double> f) {
  return apply(f, [](std::size_t k) -> std::complex<double> {
    if (k == 0) return 0.0;
    return -std::numbers::pi / static_cast<double>(k);
  });
}

std::vector<double> cumulative_integral(std::span<const double> f) {
  const std::size_t n = f.size();
  const std::size_t half = n / 2;
  const double m = mean(f);
  std::vector<double> periodic = apply(f, [half](std::size_t k) -> std::complex<double> {
    if (k == 0 || k == half) return 0.0;
    return {0.0, -1.0 / static_cast<double>(k)};
  });
  const double base = periodic[0];
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j)
    periodic[j] = periodic[j] - base + m * h * static_cast<double>(j);
  return periodic;
}

double integrate(std::span<const double> f) {
  return 2.0 * std::numbers::pi * mean(f);
}

double mean(std::span<const double> f) {
  if (f.empty()) return 0.0;
  return pairwise_sum(f) / static_cast<double>(f.size());
}

double tail_energy_fraction(std::span<const double> f) {
  const std::size_t n = f.size();
  Coefficients c = forward(f);
  std::vector<double> all, tail;
  all.reserve(c.size());
  for (std::size_t k = 1; k < c.size(); ++k) {
    double e = std::norm(c[k]);
    all.push_back(e);
    if (3 * k > n) tail.push_back(e);
  }
  double total = pairwise_sum(all);
  if (total == 0.0) return 0.0;
  return pairwise_sum(tail) / total;
}

double evaluate(const Coefficients& c, std::size_t n, double xi) {
  const std::size_t half = n / 2;
  double acc = c[0].real();
  for (std::size_t k = 1; k < half; ++k) {
    double kx = static_cast<double>(k) * xi;
    acc += 2.0 * (c[k].real() * std::cos(kx) - c[k].imag() * std::sin(kx));
  }
  acc += c[half].real() * std::cos(static_cast<double>(half) * xi);
  return acc / static_cast<double>(n);
}

double evaluate_derivative(const Coefficients& c, std::size_t n, double xi) {
  const std::size_t half = n / 2;
  double acc = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    double kd = static_cast<double>(k);
    double kx = kd * xi;
    acc += -2.0 * kd * (c[k].real() * std::sin(kx) + c[k].imag() * std::cos(kx));
  }
  double hd = static_cast<double>(half);
  acc += -hd * c[half].real() * std::sin(hd * xi);
  return acc / static_cast<double>(n);
}

}  // namespace patchlab::spectral
