// SPDX-License-Identifier: Apache-2.0
#include "nlhr/clutter.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nlhr/errors.hpp"
#include "nlhr/signal.hpp"

namespace nlhr {

namespace {
using MatrixXcd = Eigen::MatrixXcd;

// Temporal Gram eigendecomposition: cheaper than a full SVD for tall
// Casorati matrices and directly yields the temporal singular vectors the
// report needs. Eigenvalues come back ascending.
std::pair<Eigen::VectorXd, MatrixXcd> temporal_gram_eig(const CasoratiMatrix& m,
                                                        const std::vector<int>& rows) {
  const int nf = m.num_frames;
  MatrixXcd a(static_cast<Eigen::Index>(rows.size()), nf);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int f = 0; f < nf; ++f) a(static_cast<Eigen::Index>(r), f) = m.at(rows[r], f);
  MatrixXcd gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success) throw PipelineError("svd: eigendecomposition failed");
  return {eig.eigenvalues(), eig.eigenvectors()};
}

std::vector<int> unmasked_rows(const CasoratiMatrix& m) {
  std::vector<int> rows;
  rows.reserve(static_cast<std::size_t>(m.num_pixels));
  for (int p = 0; p < m.num_pixels; ++p)
    if (m.pixel_mask.empty() || m.pixel_mask[p]) rows.push_back(p);
  return rows;
}
}  // namespace

CasoratiMatrix casorati_from_slowtime(const SlowTimeEnsemble& st, int alpha_index, Side side) {
  CasoratiMatrix m;
  m.num_pixels = st.num_points;
  m.num_frames = st.num_frames;
  m.source_tag = st.tag;
  m.source_alpha_deg = st.alpha_deg.at(static_cast<std::size_t>(alpha_index));
  m.source_side = side;
  m.prf_effective = st.prf_effective;
  m.values.resize(static_cast<std::size_t>(m.num_pixels) * m.num_frames);
  m.pixel_mask.resize(static_cast<std::size_t>(m.num_pixels));
  const auto& data = side == Side::left ? st.left : st.right;
  const auto& valid = side == Side::left ? st.left_valid : st.right_valid;
  for (int p = 0; p < m.num_pixels; ++p) {
    m.pixel_mask[p] = valid[st.vidx(alpha_index, p)];
    for (int f = 0; f < m.num_frames; ++f) {
      const auto v = data[st.idx(alpha_index, p, f)];
      m.at(p, f) = {static_cast<double>(v.real()), static_cast<double>(v.imag())};
    }
  }
  return m;
}

void casorati_to_slowtime(const CasoratiMatrix& m, SlowTimeEnsemble& st, int alpha_index,
                          Side side) {
  if (m.num_pixels != st.num_points || m.num_frames != st.num_frames)
    throw PipelineError("casorati_to_slowtime: shape mismatch");
  auto& data = side == Side::left ? st.left : st.right;
  for (int p = 0; p < m.num_pixels; ++p)
    for (int f = 0; f < m.num_frames; ++f) {
      const auto v = m.at(p, f);
      data[st.idx(alpha_index, p, f)] = {static_cast<float>(v.real()),
                                         static_cast<float>(v.imag())};
    }
}

CasoratiMatrix svd_filter(const CasoratiMatrix& m, int k_remove) {
  const auto rows = unmasked_rows(m);
  const int rank_bound = std::min(static_cast<int>(rows.size()), m.num_frames);
  if (k_remove < 0 || k_remove >= rank_bound)
    throw std::invalid_argument("svd_filter: k_remove must lie in [0, min(N_p, N_f))");
  if (k_remove == 0) return m;

  auto [eigvals, eigvecs] = temporal_gram_eig(m, rows);
  (void)eigvals;
  const int nf = m.num_frames;
  // top-k temporal singular vectors (eigenvalues are ascending)
  MatrixXcd vk(nf, k_remove);
  for (int k = 0; k < k_remove; ++k) vk.col(k) = eigvecs.col(nf - 1 - k);

  CasoratiMatrix out = m;
  MatrixXcd a(static_cast<Eigen::Index>(rows.size()), nf);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int f = 0; f < nf; ++f) a(static_cast<Eigen::Index>(r), f) = m.at(rows[r], f);
  MatrixXcd filtered = a - (a * vk) * vk.adjoint();
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int f = 0; f < nf; ++f) out.at(rows[r], f) = filtered(static_cast<Eigen::Index>(r), f);
  return out;
}

SvdReport sv_report(const CasoratiMatrix& m) {
  const auto rows = unmasked_rows(m);
  SvdReport rep;
  if (rows.empty() || m.num_frames == 0) return rep;
  auto [eigvals, eigvecs] = temporal_gram_eig(m, rows);
  const int nf = m.num_frames;
  const int n = std::min(static_cast<int>(rows.size()), nf);
  rep.singular_values.resize(static_cast<std::size_t>(n));
  rep.value_db.resize(static_cast<std::size_t>(n));
  rep.frequency_hz.resize(static_cast<std::size_t>(n));
  std::vector<std::complex<double>> vec(static_cast<std::size_t>(nf));
  for (int k = 0; k < n; ++k) {
    const int col = nf - 1 - k;
    rep.singular_values[k] = std::sqrt(std::max(0.0, eigvals(col)));
    // with A = U S V^H the slow-time signature of a component in the data is
    // conj(v); report the frequency the component actually carries
    for (int f = 0; f < nf; ++f) vec[f] = std::conj(eigvecs(f, col));
    const double fk = lag_one_frequency(vec, m.prf_effective);
    rep.frequency_hz[k] = std::isnan(fk) ? 0.0 : fk;
  }
  const double smax = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
  for (int k = 0; k < n; ++k)
    rep.value_db[k] =
        smax > 0.0 && rep.singular_values[k] > 0.0
            ? 20.0 * std::log10(rep.singular_values[k] / smax)
            : (smax > 0.0 ? -400.0 : 0.0);  // floor for exactly-zero components
  return rep;
}

}  // namespace nlhr
