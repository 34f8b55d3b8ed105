#pragma once

#include <iosfwd>
#include <string>

#include "sentrisk/eval.hpp"

namespace sentrisk {

// Static SVG charts for the evaluation artifacts. Output is deterministic:
// fixed layout, fixed decimal formatting, no timestamps.

void write_roc_svg(std::ostream& out, const RocCurve& curve, const std::string& title,
                   const std::string& manifest_hash);

void write_risk_bins_svg(std::ostream& out, const RiskBinTable& table,
                         const std::string& title, const std::string& manifest_hash);

}  // namespace sentrisk
