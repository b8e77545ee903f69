#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "maicfeas/linalg.hpp"

namespace maicfeas {

/// Individual patient data: one column per patient, one row per covariate.
struct IpdMatrix {
  Matrix values;  // p x n
  std::vector<std::string> covariate_names;

  std::size_t p() const { return values.rows(); }
  std::size_t n() const { return values.cols(); }
};

/// Published aggregate means, aligned by covariate name to an IpdMatrix.
struct AdVector {
  Vec values;
  std::vector<std::string> covariate_names;
  std::optional<long long> n_ad;  // AD study sample size, when published

  std::size_t p() const { return values.size(); }
};

struct OutcomeVector {
  Vec values;  // one outcome per IPD patient
  std::string label;

  std::size_t n() const { return values.size(); }
};

struct StandardizationParams {
  Vec means;
  Vec sds;  // sample standard deviations, denominator n-1
};

/// Delimited-text options shared by all loaders/savers. UTF-8, '.' decimal.
struct FormatSpec {
  char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& raw, std::size_t row, std::size_t col,
                           const std::string& path) {
  const std::string s = trim(raw);
  if (s.empty())
    throw ParseError(path + ": missing value at data row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError(path + ": non-numeric value '" + s + "' at data row " +
                     std::to_string(row) + ", column " + std::to_string(col));
  }
  if (pos != s.size())
    throw ParseError(path + ": non-numeric value '" + s + "' at data row " +
                     std::to_string(row) + ", column " + std::to_string(col));
  if (!std::isfinite(v))
    throw ParseError(path + ": non-finite value at data row " + std::to_string(row) +
                     ", column " + std::to_string(col));
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // trailing blank lines are ignored; interior ones are data errors
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline void check_distinct_names(const std::vector<std::string>& names,
                                 const std::string& path) {
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (name.empty()) throw ParseError(path + ": empty covariate name in header");
    if (!seen.insert(name).second)
      throw ParseError(path + ": duplicate covariate name '" + name + "'");
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads a delimited file with a header row of covariate names and one data
/// row per patient, transposing into the column-per-patient layout.
inline IpdMatrix load_ipd(const std::string& path, const FormatSpec& fmt = {}) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError(path + ": file is empty");

  IpdMatrix ipd;
  ipd.covariate_names = detail::split_line(lines[0], fmt.delimiter);
  for (auto& name : ipd.covariate_names) name = detail::trim(name);
  detail::check_distinct_names(ipd.covariate_names, path);

  const std::size_t p = ipd.covariate_names.size();
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw ParseError(path + ": no data rows");

  ipd.values = Matrix(p, n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto fields = detail::split_line(lines[r + 1], fmt.delimiter);
    if (fields.size() != p)
      throw ParseError(path + ": data row " + std::to_string(r + 1) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(p));
    for (std::size_t c = 0; c < p; ++c)
      ipd.values(c, r) = detail::parse_number(fields[c], r + 1, c + 1, path);
  }
  return ipd;
}

/// Reads a two-column `name,value` file. The reserved name `n_ad` carries the
/// AD sample size. Entries keep file order; use align_ad for name alignment.
inline AdVector load_ad(const std::string& path, const FormatSpec& fmt = {}) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw ParseError(path + ": file is empty");

  AdVector ad;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (detail::trim(lines[r]).empty()) continue;
    const auto fields = detail::split_line(lines[r], fmt.delimiter);
    if (fields.size() != 2)
      throw ParseError(path + ": row " + std::to_string(r + 1) +
                       " must have exactly two fields (name,value)");
    const std::string name = detail::trim(fields[0]);
    if (name == "n_ad") {
      const double v = detail::parse_number(fields[1], r + 1, 2, path);
      const long long iv = static_cast<long long>(v);
      if (v != static_cast<double>(iv) || iv < 1)
        throw ParseError(path + ": n_ad must be a positive integer");
      ad.n_ad = iv;
      continue;
    }
    if (name.empty()) throw ParseError(path + ": empty covariate name at row " +
                                       std::to_string(r + 1));
    ad.covariate_names.push_back(name);
    ad.values.push_back(detail::parse_number(fields[1], r + 1, 2, path));
  }
  detail::check_distinct_names(ad.covariate_names, path);
  if (ad.values.empty()) throw ParseError(path + ": no covariate entries");
  return ad;
}

/// Reorders an AdVector to match the covariate order of `ipd`. Alignment is
/// strictly by name; any covariate present on one side only is an error.
inline AdVector align_ad(const AdVector& ad, const IpdMatrix& ipd) {
  std::vector<std::string> extra, missing;
  for (const auto& name : ad.covariate_names) {
    if (std::find(ipd.covariate_names.begin(), ipd.covariate_names.end(), name) ==
        ipd.covariate_names.end())
      extra.push_back(name);
  }
  for (const auto& name : ipd.covariate_names) {
    if (std::find(ad.covariate_names.begin(), ad.covariate_names.end(), name) ==
        ad.covariate_names.end())
      missing.push_back(name);
  }
  if (!extra.empty() || !missing.empty()) {
    std::string msg = "AD/IPD covariate mismatch:";
    if (!extra.empty()) {
      msg += " AD has covariates absent from IPD: ";
      for (std::size_t i = 0; i < extra.size(); ++i)
        msg += (i ? ", " : "") + extra[i];
      msg += ".";
    }
    if (!missing.empty()) {
      msg += " IPD covariates missing from AD: ";
      for (std::size_t i = 0; i < missing.size(); ++i)
        msg += (i ? ", " : "") + missing[i];
      msg += ".";
    }
    throw AlignmentError(msg);
  }

  AdVector out;
  out.covariate_names = ipd.covariate_names;
  out.n_ad = ad.n_ad;
  out.values.resize(ipd.p());
  for (std::size_t i = 0; i < ipd.p(); ++i) {
    const auto it = std::find(ad.covariate_names.begin(), ad.covariate_names.end(),
                              ipd.covariate_names[i]);
    out.values[i] = ad.values[static_cast<std::size_t>(
        std::distance(ad.covariate_names.begin(), it))];
  }
  return out;
}

inline AdVector load_ad_aligned(const std::string& path, const IpdMatrix& ipd,
                                const FormatSpec& fmt = {}) {
  return align_ad(load_ad(path, fmt), ipd);
}

/// Reads a single-column outcome file: header row is the label, one value per
/// patient below it.
inline OutcomeVector load_outcome(const std::string& path, const FormatSpec& fmt = {}) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) throw ParseError(path + ": expected a header and data rows");
  OutcomeVector out;
  out.label = detail::trim(lines[0]);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_line(lines[r], fmt.delimiter);
    if (fields.size() != 1)
      throw ParseError(path + ": outcome row " + std::to_string(r) +
                       " must have exactly one field");
    out.values.push_back(detail::parse_number(fields[0], r, 1, path));
  }
  return out;
}

inline void save_ipd(const IpdMatrix& ipd, const std::string& path,
                     const FormatSpec& fmt = {}) {
  std::ofstream outf(path);
  if (!outf) throw Error(path + ": cannot open for writing");
  for (std::size_t i = 0; i < ipd.p(); ++i)
    outf << (i ? std::string(1, fmt.delimiter) : "") << ipd.covariate_names[i];
  outf << "\n";
  for (std::size_t j = 0; j < ipd.n(); ++j) {
    for (std::size_t i = 0; i < ipd.p(); ++i)
      outf << (i ? std::string(1, fmt.delimiter) : "")
           << detail::format_double(ipd.values(i, j));
    outf << "\n";
  }
}

inline void save_ad(const AdVector& ad, const std::string& path,
                    const FormatSpec& fmt = {}) {
  std::ofstream outf(path);
  if (!outf) throw Error(path + ": cannot open for writing");
  for (std::size_t i = 0; i < ad.p(); ++i)
    outf << ad.covariate_names[i] << fmt.delimiter
         << detail::format_double(ad.values[i]) << "\n";
  if (ad.n_ad) outf << "n_ad" << fmt.delimiter << *ad.n_ad << "\n";
}

/// Appends, for each (name, ad_variance) target, the squared residual row
/// (sqrt(n/(n-1)) * (y_ij - mean_j))^2 to the IPD and the published variance
/// to the AD. Matching on these rows matches the covariate's variance.
inline std::pair<IpdMatrix, AdVector> augment_variance_columns(
    const IpdMatrix& ipd, const AdVector& ad,
    const std::vector<std::pair<std::string, double>>& targets) {
  if (targets.empty()) return {ipd, ad};
  const std::size_t n = ipd.n();
  if (n < 2) throw Error("augment_variance_columns: need at least two patients");

  IpdMatrix out_ipd = ipd;
  AdVector out_ad = ad;
  const std::size_t p0 = ipd.p();
  Matrix values(p0 + targets.size(), n);
  for (std::size_t i = 0; i < p0; ++i)
    for (std::size_t j = 0; j < n; ++j) values(i, j) = ipd.values(i, j);

  const double factor = std::sqrt(static_cast<double>(n) / static_cast<double>(n - 1));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto& [name, variance] = targets[t];
    if (variance <= 0.0)
      throw Error("augment_variance_columns: non-positive AD variance for '" + name + "'");
    const auto it = std::find(ipd.covariate_names.begin(), ipd.covariate_names.end(), name);
    if (it == ipd.covariate_names.end())
      throw Error("augment_variance_columns: unknown covariate '" + name + "'");
    const std::size_t row =
        static_cast<std::size_t>(std::distance(ipd.covariate_names.begin(), it));
    const double mean = sample_mean(ipd.values.row(row));
    for (std::size_t j = 0; j < n; ++j) {
      const double r = factor * (ipd.values(row, j) - mean);
      values(p0 + t, j) = r * r;
    }
    out_ipd.covariate_names.push_back(name + "__var");
    out_ad.covariate_names.push_back(name + "__var");
    out_ad.values.push_back(variance);
  }
  detail::check_distinct_names(out_ipd.covariate_names, "augment_variance_columns");
  out_ipd.values = std::move(values);
  return {out_ipd, out_ad};
}

/// Standardizes every IPD row to mean 0 / sample sd 1 and transforms the AD
/// with the same IPD-derived parameters. Constant covariates are rejected;
/// drop them before standardizing.
inline std::tuple<IpdMatrix, AdVector, StandardizationParams> standardize(
    const IpdMatrix& ipd, const AdVector& ad) {
  const std::size_t p = ipd.p(), n = ipd.n();
  if (ad.p() != p) throw AlignmentError("standardize: AD/IPD dimension mismatch");
  if (n < 2) throw Error("standardize: need at least two patients");

  StandardizationParams params;
  params.means.resize(p);
  params.sds.resize(p);
  std::vector<std::string> constant;
  for (std::size_t i = 0; i < p; ++i) {
    const Vec row = ipd.values.row(i);
    params.means[i] = sample_mean(row);
    params.sds[i] = sample_sd(row);
    if (params.sds[i] <= 0.0) constant.push_back(ipd.covariate_names[i]);
  }
  if (!constant.empty()) {
    std::string msg = "standardize: constant covariate(s): ";
    for (std::size_t i = 0; i < constant.size(); ++i) msg += (i ? ", " : "") + constant[i];
    throw Error(msg);
  }

  IpdMatrix z = ipd;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j)
      z.values(i, j) = (ipd.values(i, j) - params.means[i]) / params.sds[i];

  AdVector adz = ad;
  for (std::size_t i = 0; i < p; ++i)
    adz.values[i] = (ad.values[i] - params.means[i]) / params.sds[i];

  return {std::move(z), std::move(adz), std::move(params)};
}

inline IpdMatrix destandardize(const IpdMatrix& z, const StandardizationParams& params) {
  IpdMatrix out = z;
  for (std::size_t i = 0; i < z.p(); ++i)
    for (std::size_t j = 0; j < z.n(); ++j)
      out.values(i, j) = z.values(i, j) * params.sds[i] + params.means[i];
  return out;
}

namespace detail {

/// Standardization used internally by the feasibility machinery: rows with
/// vanishing sd are centered but left unscaled, so degenerate covariates do
/// not abort the check (they surface as Boundary/Infeasible instead).
struct RobustScaling {
  Vec means;
  Vec scales;
};

inline RobustScaling robust_scaling(const Matrix& y) {
  const std::size_t p = y.rows(), n = y.cols();
  RobustScaling s;
  s.means.resize(p);
  s.scales.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const Vec row = y.row(i);
    s.means[i] = sample_mean(row);
    double sd = 0.0;
    if (n >= 2) {
      double ss = 0.0;
      for (double v : row) ss += (v - s.means[i]) * (v - s.means[i]);
      sd = std::sqrt(ss / static_cast<double>(n - 1));
    }
    s.scales[i] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

}  // namespace detail

}  // namespace maicfeas
