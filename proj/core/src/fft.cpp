#include "rgbt/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "rgbt/error.hpp"

namespace rgbt {

namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int w, int h, int sign) {
    std::lock_guard lock(mu_);
    const auto key = std::make_tuple(w, h, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    fftw_plan plan = fftw_plan_dft_2d(h, w, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

Spectrum fft2(std::span<const double> data, int w, int h) {
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() != n) throw DimensionError("fft2: data size does not match dimensions");
  Spectrum out(data.begin(), data.end());
  auto* p = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(cache().get(w, h, FFTW_FORWARD), p, p);
  return out;
}

std::vector<double> ifft2_real(const Spectrum& spec, int w, int h) {
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (spec.size() != n) throw DimensionError("ifft2: spectrum size does not match dimensions");
  Spectrum tmp = spec;
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  fftw_execute_dft(cache().get(w, h, FFTW_BACKWARD), p, p);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = tmp[i].real() * scale;
  return out;
}

}  // namespace rgbt
