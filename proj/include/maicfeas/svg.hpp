#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "maicfeas/maic.hpp"
#include "maicfeas/pca.hpp"

namespace maicfeas {

namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << content;
  if (!out) throw Error(path + ": write failed");
}

struct LinearScale {
  double lo, hi, out_lo, out_hi;
  double operator()(double v) const {
    const double span = hi - lo;
    const double t = span > 0.0 ? (v - lo) / span : 0.5;
    return out_lo + t * (out_hi - out_lo);
  }
};

inline LinearScale padded_scale(double lo, double hi, double out_lo, double out_hi) {
  double span = hi - lo;
  if (span <= 0.0) span = std::max(std::abs(lo), 1.0);
  return {lo - 0.08 * span, hi + 0.08 * span, out_lo, out_hi};
}

}  // namespace detail

/// One horizontal dot strip per PC: IPD scores as open circles, the AD score
/// as a filled triangle (class "ad-marker", plus "outside" when flagged), and
/// a dashed vertical line at score 0.
inline void render_pc_dotplot(const PcaProjection& proj, const std::string& path) {
  const std::size_t p = proj.eigenvalues.size();
  const std::size_t n = proj.ipd_scores.cols();
  const double width = 860.0, left = 96.0, right = 820.0;
  const double strip_h = 54.0, top = 34.0;
  const double height = top + strip_h * static_cast<double>(p) + 16.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<style>.ipd-point{fill:none;stroke:#456;stroke-width:1}"
         ".ad-marker{fill:#000}.ad-marker.outside{fill:#c22}"
         ".zero-line{stroke:#888;stroke-dasharray:4 3;stroke-width:1}"
         ".pc-label{font:12px sans-serif}</style>\n";
  svg << "<text class=\"pc-label\" x=\"8\" y=\"18\">IPD principal-component scores "
         "with AD projected into the same coordinates</text>\n";

  for (std::size_t k = 0; k < p; ++k) {
    const double y0 = top + strip_h * static_cast<double>(k);
    const double cy = y0 + strip_h * 0.55;
    double lo = std::min(proj.per_pc_range[k].first, proj.ad_scores[k]);
    double hi = std::max(proj.per_pc_range[k].second, proj.ad_scores[k]);
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
    const detail::LinearScale x = detail::padded_scale(lo, hi, left, right);

    const bool outside =
        std::find(proj.ad_outside.begin(), proj.ad_outside.end(), k) !=
        proj.ad_outside.end();
    svg << "<g class=\"pc-strip\" data-pc=\"" << (k + 1) << "\">\n";
    svg << "  <text class=\"pc-label\" x=\"8\" y=\"" << detail::svg_num(cy + 4)
        << "\">PC" << (k + 1) << " (λ=" << detail::svg_num(proj.eigenvalues[k])
        << ")" << (outside ? " *" : "") << "</text>\n";
    svg << "  <line class=\"zero-line\" x1=\"" << detail::svg_num(x(0.0))
        << "\" y1=\"" << detail::svg_num(y0 + 6) << "\" x2=\""
        << detail::svg_num(x(0.0)) << "\" y2=\"" << detail::svg_num(y0 + strip_h - 4)
        << "\"/>\n";
    for (std::size_t j = 0; j < n; ++j) {
      svg << "  <circle class=\"ipd-point\" cx=\""
          << detail::svg_num(x(proj.ipd_scores(k, j))) << "\" cy=\""
          << detail::svg_num(cy) << "\" r=\"4\"/>\n";
    }
    const double ax = x(proj.ad_scores[k]);
    svg << "  <polygon class=\"ad-marker" << (outside ? " outside" : "")
        << "\" points=\"" << detail::svg_num(ax) << "," << detail::svg_num(cy - 7)
        << " " << detail::svg_num(ax - 6) << "," << detail::svg_num(cy + 5) << " "
        << detail::svg_num(ax + 6) << "," << detail::svg_num(cy + 5) << "\"/>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  detail::write_file(path, svg.str());
}

/// Two-covariate scatter with circle area proportional to the MAIC weight,
/// the top-5 weights labeled 1–5 by rank, the AD vector as a filled triangle
/// and the IPD mean as a solid dot. Only defined for p = 2.
inline void render_scatter_with_weights(const IpdMatrix& ipd, const AdVector& ad,
                                        const MaicFit& fit, const std::string& path) {
  if (ipd.p() != 2)
    throw Error("render_scatter_with_weights: requires exactly 2 covariates; "
                "use the PC dot plot for higher dimensions");
  if (fit.weights.size() != ipd.n())
    throw Error("render_scatter_with_weights: fit does not match data");

  const std::size_t n = ipd.n();
  const double width = 640.0, height = 640.0;
  double xlo = ad.values[0], xhi = ad.values[0];
  double ylo = ad.values[1], yhi = ad.values[1];
  for (std::size_t j = 0; j < n; ++j) {
    xlo = std::min(xlo, ipd.values(0, j));
    xhi = std::max(xhi, ipd.values(0, j));
    ylo = std::min(ylo, ipd.values(1, j));
    yhi = std::max(yhi, ipd.values(1, j));
  }
  const detail::LinearScale sx = detail::padded_scale(xlo, xhi, 60.0, 610.0);
  const detail::LinearScale sy = detail::padded_scale(ylo, yhi, 600.0, 40.0);

  const double wmax = *std::max_element(fit.weights.begin(), fit.weights.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fit.weights[a] > fit.weights[b];
  });

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<style>.patient{fill:none;stroke:#345;stroke-width:1}"
         ".ad-marker{fill:#000}.ipd-mean{fill:#345}"
         ".weight-label{font:11px sans-serif;fill:#a22}"
         ".axis-label{font:12px sans-serif}</style>\n";
  svg << "<text class=\"axis-label\" x=\"300\" y=\"628\">" << ipd.covariate_names[0]
      << "</text>\n";
  svg << "<text class=\"axis-label\" x=\"10\" y=\"320\" transform=\"rotate(-90 14 320)\">"
      << ipd.covariate_names[1] << "</text>\n";

  for (std::size_t j = 0; j < n; ++j) {
    const double r = 2.0 + 14.0 * std::sqrt(fit.weights[j] / wmax);
    svg << "<circle class=\"patient\" data-id=\"" << (j + 1) << "\" cx=\""
        << detail::svg_num(sx(ipd.values(0, j))) << "\" cy=\""
        << detail::svg_num(sy(ipd.values(1, j))) << "\" r=\"" << detail::svg_num(r)
        << "\"/>\n";
  }
  const std::size_t labels = std::min<std::size_t>(5, n);
  for (std::size_t rank = 0; rank < labels; ++rank) {
    const std::size_t j = order[rank];
    svg << "<text class=\"weight-label\" x=\""
        << detail::svg_num(sx(ipd.values(0, j)) + 5) << "\" y=\""
        << detail::svg_num(sy(ipd.values(1, j)) - 5) << "\">" << (rank + 1)
        << "</text>\n";
  }
  const double mx = sample_mean(ipd.values.row(0));
  const double my = sample_mean(ipd.values.row(1));
  svg << "<circle class=\"ipd-mean\" cx=\"" << detail::svg_num(sx(mx)) << "\" cy=\""
      << detail::svg_num(sy(my)) << "\" r=\"4\"/>\n";
  const double ax = sx(ad.values[0]), ay = sy(ad.values[1]);
  svg << "<polygon class=\"ad-marker\" points=\"" << detail::svg_num(ax) << ","
      << detail::svg_num(ay - 8) << " " << detail::svg_num(ax - 7) << ","
      << detail::svg_num(ay + 6) << " " << detail::svg_num(ax + 7) << ","
      << detail::svg_num(ay + 6) << "\"/>\n";
  svg << "</svg>\n";
  detail::write_file(path, svg.str());
}

}  // namespace maicfeas
