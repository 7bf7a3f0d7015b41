#include <algorithm>
#include <string>

#include "lsmd/errors.hpp"
#include "lsmd/estimator.hpp"

namespace lsmd {

InstrumentSet build_instruments(const PanelData& panel, int lags, InstrumentMode mode) {
  if (lags < 1) throw ValidationError("build_instruments: L must be >= 1");
  const Eigen::Index n = panel.n();
  const Eigen::Index t = panel.t();
  if (n < 1 || t < 1) throw ValidationError("build_instruments: empty panel");
  const Eigen::Index pre = mode == InstrumentMode::presample ? panel.pre_periods() : 0;
  if (pre > 0 && panel.pre_sample.rows() != n) {
    throw ValidationError("build_instruments: pre-sample rows do not match N");
  }
  if (pre + t < lags + 2) {
    throw SampleTooShort("build_instruments: need at least L + 2 = " + std::to_string(lags + 2) +
                         " periods including pre-sample, have " + std::to_string(pre + t));
  }

  Matrix full(n, pre + t);
  full.leftCols(pre) = panel.pre_sample.rightCols(pre);
  full.rightCols(t) = panel.y;

  InstrumentSet out;
  out.lags = lags;
  out.mode = mode;
  out.alignment = static_cast<int>(std::max<Eigen::Index>(0, lags + 1 - pre));
  out.t_eff = static_cast<int>(t - out.alignment);
  const Eigen::Index start = pre + out.alignment;  // column of the first window period in `full`

  out.y = full.middleCols(start, out.t_eff);
  out.y_lag = full.middleCols(start - 1, out.t_eff);
  out.z.reserve(static_cast<std::size_t>(lags));
  for (int l = 1; l <= lags; ++l) {
    out.z.push_back(full.middleCols(start - 1 - l, out.t_eff));
  }
  return out;
}

void attach_covariates(InstrumentSet& instruments, const std::vector<Matrix>& covariates) {
  const Eigen::Index n = instruments.y.rows();
  for (const Matrix& x : covariates) {
    if (x.rows() != n || x.cols() != instruments.alignment + instruments.t_eff) {
      throw ValidationError("covariate matrices must be N x T");
    }
    instruments.x.push_back(x.rightCols(instruments.t_eff));
  }
}

}  // namespace lsmd
