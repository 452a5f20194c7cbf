// SPDX-License-Identifier: Apache-2.0
#include "nlhr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace nlhr {
namespace {

// FFTW plan creation is not thread safe; execution via fftw_execute_dft on
// distinct buffers is. Plans are cached per (size, sign).
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan get_plan(int n, int sign) {
  struct Key {
    int n, sign;
    bool operator<(const Key& o) const { return n != o.n ? n < o.n : sign < o.sign; }
  };
  static std::map<Key, fftw_plan>* cache = new std::map<Key, fftw_plan>();
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache->find({n, sign});
  if (it != cache->end()) return it->second;
  // Planning with FFTW_ESTIMATE leaves the input buffer untouched.
  fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
  fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  (*cache)[{n, sign}] = plan;
  return plan;
}

std::vector<std::complex<double>> run(std::span<const std::complex<double>> x, int sign) {
  std::vector<std::complex<double>> out(x.begin(), x.end());
  if (out.empty()) return out;
  fftw_plan plan = get_plan(static_cast<int>(out.size()), sign);
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, buf, buf);
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> x) {
  return run(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(std::span<const std::complex<double>> x) {
  auto out = run(x, FFTW_BACKWARD);
  const double scale = out.empty() ? 1.0 : 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<std::complex<double>> fft_real(std::span<const double> x) {
  std::vector<std::complex<double>> tmp(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) tmp[i] = x[i];
  return fft(tmp);
}

}  // namespace nlhr
