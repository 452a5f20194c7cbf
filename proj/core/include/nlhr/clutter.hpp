// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "nlhr/beamforming.hpp"

namespace nlhr {

/// Pixels x frames slow-time matrix for one (beamformer, alpha, side) cube.
/// Masked pixels are excluded from the factorization rows.
struct CasoratiMatrix {
  int num_pixels = 0;
  int num_frames = 0;
  std::vector<std::complex<double>> values;  // [pixel][frame]
  std::vector<std::uint8_t> pixel_mask;      // 1 = row participates
  BeamformerKind source_tag = BeamformerKind::das;
  double source_alpha_deg = 0.0;
  Side source_side = Side::left;
  double prf_effective = 0.0;

  std::complex<double>& at(int p, int f) {
    return values[static_cast<std::size_t>(p) * num_frames + f];
  }
  const std::complex<double>& at(int p, int f) const {
    return values[static_cast<std::size_t>(p) * num_frames + f];
  }
};

CasoratiMatrix casorati_from_slowtime(const SlowTimeEnsemble& st, int alpha_index, Side side);
void casorati_to_slowtime(const CasoratiMatrix& m, SlowTimeEnsemble& st, int alpha_index,
                          Side side);

/// Removes the k largest singular-value components (projection onto the
/// orthogonal complement of the dominant temporal singular subspace); every
/// other component is untouched.
CasoratiMatrix svd_filter(const CasoratiMatrix& m, int k_remove);

/// Singular spectrum diagnostics: values in dB relative to the largest and
/// the lag-one autocorrelation frequency of each temporal singular vector.
struct SvdReport {
  std::vector<double> singular_values;  // descending, >= 0
  std::vector<double> value_db;         // 20 log10(s / s_max)
  std::vector<double> frequency_hz;
};

SvdReport sv_report(const CasoratiMatrix& m);

}  // namespace nlhr
