#pragma once

#include <fftw3.h>

#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <string>
#include <vector>

namespace reconnect2d {

using Complex = std::complex<double>;

template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
// r2c half spectrum, row-major [ky slot][kx slot], kx slot in [0, n/2].
using Spectrum = std::vector<Complex, FftwAllocator<Complex>>;

// Worker cap from RECONNECT2D_THREADS (default 1).
inline int thread_cap() {
  static const int cap = [] {
    const char* s = std::getenv("RECONNECT2D_THREADS");
    int v = s ? std::atoi(s) : 1;
    return v > 0 ? v : 1;
  }();
  return cap;
}

// FFTW planning is not thread-safe; execution with the new-array interface is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan2d {
 public:
  explicit FftPlan2d(int n) : n_(n), nk_(n / 2 + 1) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    static const bool threads_ready = [] {
      fftw_init_threads();
      return true;
    }();
    (void)threads_ready;
    fftw_plan_with_nthreads(thread_cap());
    RealBuffer r(static_cast<std::size_t>(n) * n);
    Spectrum c(static_cast<std::size_t>(n) * nk_);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    fwd_ = fftw_plan_dft_r2c_2d(n, n, r.data(), cp, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(n, n, cp, r.data(), FFTW_ESTIMATE);
  }
  ~FftPlan2d() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  FftPlan2d(const FftPlan2d&) = delete;
  FftPlan2d& operator=(const FftPlan2d&) = delete;

  int n() const { return n_; }
  int nk() const { return nk_; }
  std::size_t spectrum_size() const { return static_cast<std::size_t>(n_) * nk_; }

  // Both arrays must come from fftw_malloc (RealBuffer / Spectrum).
  void forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }

  // Normalized by 1/n^2. Overwrites `in`.
  void inverse_destroy(Complex* in, double* out) const {
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(in), out);
    const double s = 1.0 / (static_cast<double>(n_) * n_);
    for (std::size_t k = 0, m = static_cast<std::size_t>(n_) * n_; k < m; ++k) out[k] *= s;
  }

 private:
  int n_, nk_;
  fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

inline const FftPlan2d& fft_plan(int n) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<FftPlan2d>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& p = cache[n];
  if (!p) p = std::make_unique<FftPlan2d>(n);
  return *p;
}

// Complex 1D transform for closed-curve parametrizations. Unnormalized both ways.
class FftPlan1d {
 public:
  explicit FftPlan1d(int m) : m_(m) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    Spectrum a(m), b(m);
    auto* ap = reinterpret_cast<fftw_complex*>(a.data());
    auto* bp = reinterpret_cast<fftw_complex*>(b.data());
    fwd_ = fftw_plan_dft_1d(m, ap, bp, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(m, ap, bp, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPlan1d() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlan1d(const FftPlan1d&) = delete;
  FftPlan1d& operator=(const FftPlan1d&) = delete;

  void forward(const Complex* in, Complex* out) const { run(fwd_, in, out); }
  void backward(const Complex* in, Complex* out) const { run(bwd_, in, out); }

 private:
  static void run(fftw_plan p, const Complex* in, Complex* out) {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  int m_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

inline const FftPlan1d& fft_plan_1d(int m) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<FftPlan1d>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& p = cache[m];
  if (!p) p = std::make_unique<FftPlan1d>(m);
  return *p;
}

}  // namespace reconnect2d
