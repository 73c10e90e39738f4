#include "tgeo/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace tgeo::fft {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex planner_mutex;

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

template <class T>
struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : n(n), data(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::size_t n;
  T* data;
};

enum class Kind { R2C, C2R, C2CForward, C2CBackward };

fftw_plan plan_for(Kind kind, int m) {
  static std::map<std::pair<Kind, int>, PlanPtr> cache;
  std::lock_guard lock(planner_mutex);
  auto key = std::make_pair(kind, m);
  if (auto it = cache.find(key); it != cache.end()) return it->second.get();
  FftwBuffer<double> r(static_cast<std::size_t>(m));
  FftwBuffer<fftw_complex> c(static_cast<std::size_t>(m));
  fftw_plan p = nullptr;
  switch (kind) {
    case Kind::R2C: p = fftw_plan_dft_r2c_1d(m, r.data, c.data, FFTW_ESTIMATE); break;
    case Kind::C2R: p = fftw_plan_dft_c2r_1d(m, c.data, r.data, FFTW_ESTIMATE); break;
    case Kind::C2CForward: {
      FftwBuffer<fftw_complex> c2(static_cast<std::size_t>(m));
      p = fftw_plan_dft_1d(m, c.data, c2.data, FFTW_FORWARD, FFTW_ESTIMATE);
      break;
    }
    case Kind::C2CBackward: {
      FftwBuffer<fftw_complex> c2(static_cast<std::size_t>(m));
      p = fftw_plan_dft_1d(m, c.data, c2.data, FFTW_BACKWARD, FFTW_ESTIMATE);
      break;
    }
  }
  cache.emplace(key, PlanPtr(p));
  return p;
}

}  // namespace

int good_size(int n) {
  int best = 1;
  while (best < n) best *= 2;
  for (int p2 = 1; p2 < 2 * n; p2 *= 2)
    for (int p3 = p2; p3 < 2 * n; p3 *= 3)
      for (int p5 = p3; p5 < 2 * n; p5 *= 5)
        if (p5 >= n && p5 < best) best = p5;
  return best;
}

std::vector<cplx> forward_real(std::span<const double> x) {
  const int m = static_cast<int>(x.size());
  FftwBuffer<double> in(x.size());
  FftwBuffer<fftw_complex> out(x.size() / 2 + 1);
  std::copy(x.begin(), x.end(), in.data);
  fftw_execute_dft_r2c(plan_for(Kind::R2C, m), in.data, out.data);
  std::vector<cplx> result(x.size() / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out.data[k][0], out.data[k][1]};
  return result;
}

std::vector<double> backward_real(std::span<const cplx> half, int m) {
  FftwBuffer<fftw_complex> in(static_cast<std::size_t>(m / 2 + 1));
  FftwBuffer<double> out(static_cast<std::size_t>(m));
  for (int k = 0; k <= m / 2; ++k) {
    const cplx v = k < static_cast<int>(half.size()) ? half[k] : cplx{};
    in.data[k][0] = v.real();
    in.data[k][1] = v.imag();
  }
  // c2r destroys its input; it is a scratch copy here.
  fftw_execute_dft_c2r(plan_for(Kind::C2R, m), in.data, out.data);
  return std::vector<double>(out.data, out.data + m);
}

std::vector<cplx> dft(std::span<const cplx> x, int sign) {
  const int m = static_cast<int>(x.size());
  FftwBuffer<fftw_complex> in(x.size());
  FftwBuffer<fftw_complex> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    in.data[j][0] = x[j].real();
    in.data[j][1] = x[j].imag();
  }
  fftw_execute_dft(plan_for(sign < 0 ? Kind::C2CForward : Kind::C2CBackward, m), in.data, out.data);
  std::vector<cplx> result(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) result[j] = {out.data[j][0], out.data[j][1]};
  return result;
}

}  // namespace tgeo::fft
