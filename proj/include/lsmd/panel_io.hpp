#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "lsmd/panel.hpp"

namespace lsmd {

// Panel CSV layout (header required, column order free):
//   unit,time,y[,pre][,y_latent][,x1,...,xk]
// `pre` marks pre-sample rows (1) that only feed lagged instruments. Every
// unit must cover the same consecutive time range.

/// Throws ParseError (with line number), UnbalancedPanel or TimeGap.
PanelData read_panel(std::istream& in);
PanelData read_panel(const std::string& path);

/// Reals are written with 17 significant digits so that read_panel recovers
/// them bitwise. Pre-sample rows get times -P+1..0 and pre = 1.
void write_panel(const PanelData& panel, std::ostream& out);
void write_panel(const PanelData& panel, const std::string& path);

}  // namespace lsmd
