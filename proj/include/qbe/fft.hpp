#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace qbe {

/// Real-to-complex 2-D transforms on an n x n grid, cached per n.
/// forward() divides by n^2 so the output holds the Fourier coefficients a_k
/// of f(x) = sum_k a_k e^{i k.x}; backward() is the plain synthesis sum.
/// Plans use FFTW_ESTIMATE, which is deterministic across runs. Calls are
/// serialized per grid size through an internal mutex (transforms are issued
/// from the stepping thread; pointwise kernels parallelize elsewhere).
class Fft2D {
 public:
  static const Fft2D& get(int n) {
    static std::mutex reg_mutex;
    static std::map<int, std::unique_ptr<Fft2D>> registry;
    std::lock_guard<std::mutex> lock(reg_mutex);
    auto it = registry.find(n);
    if (it == registry.end())
      it = registry.emplace(n, std::unique_ptr<Fft2D>(new Fft2D(n))).first;
    return *it->second;
  }

  int n() const { return n_; }
  int spec_cols() const { return n_ / 2 + 1; }
  std::size_t spec_size() const { return std::size_t(n_) * spec_cols(); }

  void forward(const double* phys, std::complex<double>* spec) const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::copy(phys, phys + std::size_t(n_) * n_, rbuf_);
    fftw_execute(fwd_);
    double scale = 1.0 / (double(n_) * n_);
    auto* cb = reinterpret_cast<std::complex<double>*>(cbuf_);
    for (std::size_t i = 0; i < spec_size(); ++i) spec[i] = cb[i] * scale;
  }

  void backward(const std::complex<double>* spec, double* phys) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto* cb = reinterpret_cast<std::complex<double>*>(cbuf_);
    std::copy(spec, spec + spec_size(), cb);
    fftw_execute(bwd_);
    std::copy(rbuf_, rbuf_ + std::size_t(n_) * n_, phys);
  }

  ~Fft2D() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(rbuf_);
    fftw_free(cbuf_);
  }

  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

 private:
  explicit Fft2D(int n) : n_(n) {
    rbuf_ = fftw_alloc_real(std::size_t(n) * n);
    cbuf_ = fftw_alloc_complex(spec_size());
    fwd_ = fftw_plan_dft_r2c_2d(n, n, rbuf_, cbuf_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_2d(n, n, cbuf_, rbuf_, FFTW_ESTIMATE);
  }

  int n_;
  double* rbuf_;
  fftw_complex* cbuf_;
  fftw_plan fwd_;
  fftw_plan bwd_;
  mutable std::mutex mutex_;
};

}  // namespace qbe
