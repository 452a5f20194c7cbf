#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "nlhr/clutter.hpp"
#include "nlhr/rng.hpp"

using namespace nlhr;
using std::numbers::pi;
using cd = std::complex<double>;

namespace {
CasoratiMatrix make_matrix(int np, int nf, double prf = 20e3) {
  CasoratiMatrix m;
  m.num_pixels = np;
  m.num_frames = nf;
  m.prf_effective = prf;
  m.values.assign(static_cast<std::size_t>(np) * nf, cd{0.0, 0.0});
  m.pixel_mask.assign(static_cast<std::size_t>(np), 1);
  return m;
}

double fro_norm2(const CasoratiMatrix& m) {
  double acc = 0.0;
  for (const auto& v : m.values) acc += std::norm(v);
  return acc;
}

// inner product with a rank-1 direction u v^H (both unit), |<A, uv^H>|^2
double component_power(const CasoratiMatrix& m, const std::vector<cd>& u,
                       const std::vector<cd>& v) {
  cd acc = 0.0;
  for (int p = 0; p < m.num_pixels; ++p)
    for (int f = 0; f < m.num_frames; ++f) acc += std::conj(u[p] * std::conj(v[f])) * m.at(p, f);
  return std::norm(acc);
}
}  // namespace

TEST_CASE("svd_filter k=0 is the identity") {
  auto m = make_matrix(24, 12);
  Rng rng(2);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  const auto out = svd_filter(m, 0);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK(std::abs(out.values[i] - m.values[i]) <= 1e-9 * std::abs(m.values[i]));
}

TEST_CASE("rank-1 matrix is annihilated by k=1") {
  auto m = make_matrix(30, 10);
  Rng rng(4);
  std::vector<cd> u(30), v(10);
  for (auto& x : u) x = {rng.normal(), rng.normal()};
  for (auto& x : v) x = {rng.normal(), rng.normal()};
  for (int p = 0; p < 30; ++p)
    for (int f = 0; f < 10; ++f) m.at(p, f) = u[p] * std::conj(v[f]);
  const double in_norm = std::sqrt(fro_norm2(m));
  const auto out = svd_filter(m, 1);
  CHECK(std::sqrt(fro_norm2(out)) < 1e-9 * in_norm);
}

TEST_CASE("static clutter 40 dB above rotating-phase flow is suppressed by k=1") {
  // constructed instance with a known decomposition
  const int np = 64, nf = 32;
  auto m = make_matrix(np, nf);
  Rng rng(9);
  std::vector<cd> u_c(np), u_f(np), v_c(nf), v_f(nf);
  double nc = 0.0, nfl = 0.0;
  for (int p = 0; p < np; ++p) {
    u_c[p] = {rng.normal(), rng.normal()};
    u_f[p] = {rng.normal(), rng.normal()};
    nc += std::norm(u_c[p]);
    nfl += std::norm(u_f[p]);
  }
  for (auto& x : u_c) x /= std::sqrt(nc);
  for (auto& x : u_f) x /= std::sqrt(nfl);
  // static clutter: constant temporal signature; flow: rotating phase
  for (int f = 0; f < nf; ++f) {
    v_c[f] = cd{1.0, 0.0} / std::sqrt(static_cast<double>(nf));
    const double ph = 2.0 * pi * 0.22 * f;
    v_f[f] = cd{std::cos(ph), std::sin(ph)} / std::sqrt(static_cast<double>(nf));
  }
  const double clutter_amp = 100.0;  // 40 dB in power
  for (int p = 0; p < np; ++p)
    for (int f = 0; f < nf; ++f)
      m.at(p, f) = clutter_amp * u_c[p] * std::conj(v_c[f]) + u_f[p] * std::conj(v_f[f]);

  const double clutter_before = component_power(m, u_c, v_c);
  const double flow_before = component_power(m, u_f, v_f);
  const auto out = svd_filter(m, 1);
  const double clutter_after = component_power(out, u_c, v_c);
  const double flow_after = component_power(out, u_f, v_f);

  CHECK(10.0 * std::log10(clutter_before / clutter_after) >= 20.0);
  CHECK(std::abs(10.0 * std::log10(flow_before / flow_after)) < 1.0);
}

TEST_CASE("svd_filter rejects out-of-range k") {
  auto m = make_matrix(8, 6);
  CHECK_THROWS_AS(svd_filter(m, 6), std::invalid_argument);
  CHECK_THROWS_AS(svd_filter(m, -1), std::invalid_argument);
}

TEST_CASE("energy splits across removed and kept components") {
  auto m = make_matrix(40, 16);
  Rng rng(12);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  const double total = fro_norm2(m);
  const auto kept = svd_filter(m, 3);
  // removed = A - filtered
  double removed = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i)
    removed += std::norm(m.values[i] - kept.values[i]);
  CHECK(fro_norm2(kept) + removed == doctest::Approx(total).epsilon(1e-6));
}

TEST_CASE("the removal projection is idempotent") {
  // projecting out the dominant temporal subspace twice changes nothing:
  // the filtered matrix is orthogonal to the removed components
  auto m = make_matrix(32, 12);
  Rng rng(21);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  const auto once = svd_filter(m, 2);
  // re-filtering with the *same* subspace: emulate by removing the top-2 of
  // the original from `once` via projection residual check instead:
  // <filtered, removed> must vanish
  cd inner = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i)
    inner += std::conj(m.values[i] - once.values[i]) * once.values[i];
  CHECK(std::abs(inner) < 1e-6 * fro_norm2(m));
}

TEST_CASE("svd_filter commutes with a global phase rotation") {
  auto m = make_matrix(20, 10);
  Rng rng(31);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  const cd phase{std::cos(0.7), std::sin(0.7)};
  auto rotated = m;
  for (auto& v : rotated.values) v *= phase;
  const auto a = svd_filter(m, 2);
  const auto b = svd_filter(rotated, 2);
  for (std::size_t i = 0; i < m.values.size(); ++i)
    CHECK(std::abs(b.values[i] - phase * a.values[i]) < 1e-8);
}

TEST_CASE("masked rows are left untouched and excluded from the factorization") {
  auto m = make_matrix(16, 8);
  Rng rng(5);
  for (auto& v : m.values) v = {rng.normal(), rng.normal()};
  m.pixel_mask[3] = 0;
  const auto out = svd_filter(m, 1);
  for (int f = 0; f < 8; ++f) CHECK(out.at(3, f) == m.at(3, f));
}

TEST_CASE("sv_report finds the frequency of a dominant component") {
  const int np = 48, nf = 64;
  auto m = make_matrix(np, nf, 20e3);
  Rng rng(8);
  const double fd = 0.17 * m.prf_effective;
  std::vector<cd> u(np);
  for (auto& x : u) x = {rng.normal(), rng.normal()};
  for (int p = 0; p < np; ++p)
    for (int f = 0; f < nf; ++f) {
      const double ph = 2.0 * pi * fd * f / m.prf_effective;
      m.at(p, f) = u[p] * cd{std::cos(ph), std::sin(ph)};
    }
  const auto rep = sv_report(m);
  REQUIRE(!rep.singular_values.empty());
  CHECK(rep.value_db[0] == doctest::Approx(0.0));
  // one dominant component at fd
  if (rep.singular_values.size() > 1)
    CHECK(rep.singular_values[1] < 1e-6 * rep.singular_values[0]);
  CHECK(rep.frequency_hz[0] == doctest::Approx(fd).epsilon(0.01));
  // sorted descending
  for (std::size_t k = 0; k + 1 < rep.singular_values.size(); ++k)
    CHECK(rep.singular_values[k] >= rep.singular_values[k + 1]);
}

TEST_CASE("sv_report of a zero matrix is all-zero") {
  const auto rep = sv_report(make_matrix(10, 6));
  for (double s : rep.singular_values) CHECK(s == 0.0);
}

TEST_CASE("two orthogonal components report their own frequencies and powers") {
  const int np = 40, nf = 50;
  auto m = make_matrix(np, nf, 10e3);
  const double f1 = 0.05 * m.prf_effective, f2 = 0.31 * m.prf_effective;
  // orthogonal spatial supports: first/second half of the pixels
  for (int p = 0; p < np / 2; ++p)
    for (int f = 0; f < nf; ++f) {
      const double ph = 2.0 * pi * f1 * f / m.prf_effective;
      m.at(p, f) = 3.0 * cd{std::cos(ph), std::sin(ph)};
    }
  for (int p = np / 2; p < np; ++p)
    for (int f = 0; f < nf; ++f) {
      const double ph = 2.0 * pi * f2 * f / m.prf_effective;
      m.at(p, f) = 1.0 * cd{std::cos(ph), std::sin(ph)};
    }
  const auto rep = sv_report(m);
  REQUIRE(rep.singular_values.size() >= 2);
  CHECK(rep.singular_values[0] / rep.singular_values[1] == doctest::Approx(3.0).epsilon(0.05));
  CHECK(rep.frequency_hz[0] == doctest::Approx(f1).epsilon(0.02));
  CHECK(rep.frequency_hz[1] == doctest::Approx(f2).epsilon(0.02));
}
