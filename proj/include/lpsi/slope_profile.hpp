#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "lpsi/dataset.hpp"
#include "lpsi/errors.hpp"
#include "lpsi/rational.hpp"

namespace lpsi {

/// Secant slopes s_i between consecutive points and discrete curvature signs
/// at interior points. slopes has N-1 entries; curvatures has N-2 entries,
/// curvatures[i-1] belonging to data point i (0-based).
template <class S>
struct SlopeProfile {
  std::vector<S> slopes;
  std::vector<int> curvatures;

  int curvature_at(std::size_t point) const { return curvatures[point - 1]; }
};

template <class S>
SlopeProfile<S> slope_profile(const Dataset1D<S>& d) {
  const std::size_t n = d.size();
  SlopeProfile<S> sp;
  sp.slopes.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    sp.slopes.push_back((d.y(i + 1) - d.y(i)) / (d.x(i + 1) - d.x(i)));
  }
  sp.curvatures.reserve(n >= 2 ? n - 2 : 0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sp.curvatures.push_back(sign_of(S(sp.slopes[i] - sp.slopes[i - 1])));
  }
  return sp;
}

/// Maximal block of m+1 >= 2 consecutive interior points sharing one nonzero
/// curvature sign, covering data points start .. start+m (0-based). The
/// bracket slopes are slopes[start-1 .. start+m]. A pair (m == 1) forces a
/// single knot inside its bracket; m >= 2 leaves m-1 free intermediate slopes.
struct CurvatureRun {
  int start = 0;
  int m = 0;
  int sign = 0;
};

/// The only undetermined stretches are the m >= 2 runs; everything else
/// (lone curvature spikes, m == 1 pairs, collinear stretches, the two tails)
/// is forced. Run brackets and linear regions partition [x_1, x_N].
struct RunDecomposition {
  std::vector<CurvatureRun> runs;                   // m >= 1
  std::vector<int> isolated_points;                 // lone nonzero-curvature points
  std::vector<std::pair<int, int>> linear_regions;  // [first,last] point-index ranges
};

template <class S>
RunDecomposition decompose_runs(const SlopeProfile<S>& sp) {
  const int n = static_cast<int>(sp.slopes.size()) + 1;
  if (n < 3) throw ValidationError("decompose_runs: need at least 3 points");
  RunDecomposition out;

  struct Block {
    int start;
    int len;
    int sign;
  };
  std::vector<Block> blocks;
  int i = 1;
  while (i <= n - 2) {
    const int sgn = sp.curvature_at(i);
    if (sgn == 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 <= n - 2 && sp.curvature_at(j + 1) == sgn) ++j;
    blocks.push_back({i, j - i + 1, sgn});
    i = j + 1;
  }

  // Linear regions fill the gaps between run brackets and break at lone
  // curvature points, where a knot sits exactly on the data point.
  int cursor = 0;
  for (const auto& b : blocks) {
    if (b.len == 1) {
      out.isolated_points.push_back(b.start);
      out.linear_regions.push_back({cursor, b.start});
      cursor = b.start;
    } else {
      out.runs.push_back({b.start, b.len - 1, b.sign});
      out.linear_regions.push_back({cursor, b.start});
      cursor = b.start + b.len - 1;
    }
  }
  out.linear_regions.push_back({cursor, n - 1});
  return out;
}

}  // namespace lpsi
