#include "sentrisk/svg.hpp"

#include <ostream>

#include "sentrisk/csv.hpp"

namespace sentrisk {

namespace {

constexpr int kW = 640, kH = 480;
constexpr int kLeft = 70, kRight = 20, kTop = 50, kBottom = 55;

double px(double unit) { return kLeft + unit * (kW - kLeft - kRight); }
double py(double unit) { return kH - kBottom - unit * (kH - kTop - kBottom); }

void open_svg(std::ostream& out, const std::string& title, const std::string& manifest_hash) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  if (!manifest_hash.empty()) out << "<!-- manifest=" << manifest_hash << " -->\n";
  out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\""
      << " text-anchor=\"middle\">" << title << "</text>\n";
}

void axes(std::ostream& out, const std::string& xlabel, const std::string& ylabel) {
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 14
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << (kTop + kH - kBottom) / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 20 " << (kTop + kH - kBottom) / 2 << ")\">" << ylabel
      << "</text>\n";
}

void unit_ticks(std::ostream& out, bool x_axis) {
  for (int t = 0; t <= 4; ++t) {
    const double u = t / 4.0;
    const std::string label = format_double(u, 2);
    if (x_axis) {
      out << "<line x1=\"" << format_double(px(u), 1) << "\" y1=\"" << kH - kBottom
          << "\" x2=\"" << format_double(px(u), 1) << "\" y2=\"" << kH - kBottom + 5
          << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << format_double(px(u), 1) << "\" y=\"" << kH - kBottom + 20
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << label
          << "</text>\n";
    } else {
      out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << format_double(py(u), 1) << "\" x2=\""
          << kLeft << "\" y2=\"" << format_double(py(u), 1) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << kLeft - 9 << "\" y=\"" << format_double(py(u) + 4, 1)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << label
          << "</text>\n";
    }
  }
}

}  // namespace

void write_roc_svg(std::ostream& out, const RocCurve& curve, const std::string& title,
                   const std::string& manifest_hash) {
  open_svg(out, title, manifest_hash);
  axes(out, "false positive rate", "true positive rate");
  unit_ticks(out, true);
  unit_ticks(out, false);
  out << "<line x1=\"" << format_double(px(0), 1) << "\" y1=\"" << format_double(py(0), 1)
      << "\" x2=\"" << format_double(px(1), 1) << "\" y2=\"" << format_double(py(1), 1)
      << "\" stroke=\"#999999\" stroke-dasharray=\"5,4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.8\" points=\"";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    if (i) out << ' ';
    out << format_double(px(curve.points[i].fpr), 2) << ','
        << format_double(py(curve.points[i].tpr), 2);
  }
  out << "\"/>\n";
  out << "<text x=\"" << kW - kRight - 8 << "\" y=\"" << kH - kBottom - 12
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\">AUC = "
      << format_double(curve.auc, 4) << "</text>\n";
  out << "</svg>\n";
}

void write_risk_bins_svg(std::ostream& out, const RiskBinTable& table,
                         const std::string& title, const std::string& manifest_hash) {
  open_svg(out, title, manifest_hash);
  axes(out, "risk score bin (low to high)", "fraction flagged");
  double fmax = 0.0;
  for (const auto& b : table.bins) fmax = std::max(fmax, b.fraction);
  if (fmax <= 0.0) fmax = 1.0;
  const double yscale = fmax * 1.15;

  for (int t = 0; t <= 4; ++t) {
    const double frac = yscale * t / 4.0;
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << format_double(py(t / 4.0), 1)
        << "\" x2=\"" << kLeft << "\" y2=\"" << format_double(py(t / 4.0), 1)
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 9 << "\" y=\"" << format_double(py(t / 4.0) + 4, 1)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << format_double(frac, 3) << "</text>\n";
  }

  const std::size_t k = table.bins.size();
  for (std::size_t b = 0; b < k; ++b) {
    const double x0 = px((b + 0.15) / static_cast<double>(k));
    const double x1 = px((b + 0.85) / static_cast<double>(k));
    const double h = table.bins[b].fraction / yscale;
    out << "<rect x=\"" << format_double(x0, 2) << "\" y=\"" << format_double(py(h), 2)
        << "\" width=\"" << format_double(x1 - x0, 2) << "\" height=\""
        << format_double(py(0) - py(h), 2) << "\" fill=\"#2f7fd0\"/>\n";
    out << "<text x=\"" << format_double((x0 + x1) / 2, 2) << "\" y=\"" << kH - kBottom + 20
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << (b + 1) << "</text>\n";
    out << "<text x=\"" << format_double((x0 + x1) / 2, 2) << "\" y=\""
        << format_double(py(h) - 5, 2)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
        << format_double(table.bins[b].fraction, 3) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace sentrisk
