#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "maicfeas/alt_weights.hpp"
#include "maicfeas/hotelling.hpp"
#include "maicfeas/hull.hpp"
#include "maicfeas/maic.hpp"
#include "maicfeas/pca.hpp"
#include "maicfeas/svg.hpp"

namespace maicfeas {

using json = nlohmann::ordered_json;

inline json to_json(const FeasibilityVerdict& v) {
  json j;
  j["status"] = to_string(v.status);
  j["exit_code"] = v.exit_code;
  if (v.witness) {
    j["witness"] = *v.witness;
    j["witness_violation"] = v.witness_violation;
  }
  if (v.certificate) {
    j["certificate"] = *v.certificate;
    j["separation_margin"] = v.separation_margin;
  }
  return j;
}

inline json to_json(const MaicFit& fit) {
  json j;
  j["beta"] = fit.beta;
  j["weights"] = fit.weights;
  j["ess"] = fit.ess;
  j["ess_fraction"] = fit.ess_fraction;
  j["moment_residual"] = fit.moment_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

inline json to_json(const HotellingResult& r) {
  json j;
  j["statistic"] = r.statistic;
  j["variant"] = to_string(r.variant);
  j["f_statistic"] = r.f_statistic;
  j["df1"] = r.df1;
  j["df2"] = r.df2;
  j["p_value"] = r.p_value;
  j["method"] = to_string(r.method);
  if (r.resample_draws) j["resample_draws"] = *r.resample_draws;
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

inline json pca_summary_json(const PcaProjection& p) {
  json j;
  j["eigenvalues"] = p.eigenvalues;
  j["ad_scores"] = p.ad_scores;
  json ranges = json::array();
  for (const auto& [lo, hi] : p.per_pc_range) ranges.push_back({lo, hi});
  j["per_pc_range"] = std::move(ranges);
  j["ad_outside"] = p.ad_outside;  // 0-based PC indices
  j["degenerate_pcs"] = p.degenerate_pcs;
  j["rank_warning"] = p.rank_warning;
  return j;
}

/// Full PcaProjection, loadings and scores in row-major order.
inline json to_json(const PcaProjection& p) {
  json j = pca_summary_json(p);
  json loadings = json::array();
  for (std::size_t i = 0; i < p.loadings.rows(); ++i) loadings.push_back(p.loadings.row(i));
  j["loadings_row_major"] = std::move(loadings);
  json scores = json::array();
  for (std::size_t i = 0; i < p.ipd_scores.rows(); ++i) scores.push_back(p.ipd_scores.row(i));
  j["ipd_scores_row_major"] = std::move(scores);
  return j;
}

inline json altweights_summary_json(const AltWeightSet& a) {
  json j;
  j["distance_metric"] = to_string(a.distance_metric);
  j["final"] = a.final;
  j["blend"] = a.blend;
  j["degenerate_columns"] = a.degenerate_columns;
  j["floored_distances"] = a.floored_distances;
  j["final_ess"] = effective_sample_size(a.final);
  return j;
}

struct StageError {
  std::string stage;
  std::string message;
};

struct Provenance {
  std::string tool_version{kVersion};
  std::string ipd_digest;  // fnv1a64 of the raw file bytes
  std::string ad_digest;
  std::optional<std::string> outcome_digest;
  std::optional<std::uint64_t> seed;
  std::string timestamp;         // excluded from the determinism hash
  std::string determinism_hash;  // fnv1a64 of the report body
};

/// Combined artifact of the full diagnostic workflow. `fit` can only be
/// present when the feasibility status is Interior.
struct CheckReport {
  std::optional<FeasibilityVerdict> feasibility;
  std::optional<PcaProjection> pca;
  std::vector<HotellingResult> hotelling;
  std::optional<MaicFit> fit;
  std::optional<double> weighted_outcome;
  std::optional<std::string> outcome_label;
  std::optional<AltWeightSet> altweights;
  std::vector<StageError> errors;
  Provenance provenance;
};

struct ReportOptions {
  FormatSpec format;
  std::optional<std::string> outcome_path;
  std::vector<std::pair<std::string, double>> variance_targets;
  std::optional<int> resample_draws;
  std::uint64_t seed = 0;
  bool run_altweights = false;
  DistanceMetric metric = DistanceMetric::Euclidean;
  std::optional<std::string> out_dir;  // where report.json and SVGs are written
  bool write_svgs = true;
  MaicOptions maic;
  HullOptions hull;
};

namespace detail {

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64_hex(ss.str());
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

inline json to_json(const CheckReport& r) {
  json j;
  j["feasibility"] = r.feasibility ? to_json(*r.feasibility) : json(nullptr);
  j["pca"] = r.pca ? pca_summary_json(*r.pca) : json(nullptr);
  json t2 = json::array();
  for (const auto& h : r.hotelling) t2.push_back(to_json(h));
  j["hotelling"] = std::move(t2);
  j["fit"] = r.fit ? to_json(*r.fit) : json(nullptr);
  if (r.weighted_outcome) {
    j["outcome"] = {{"label", r.outcome_label.value_or("")},
                    {"weighted_mean", *r.weighted_outcome}};
  } else {
    j["outcome"] = nullptr;
  }
  j["altweights"] = r.altweights ? altweights_summary_json(*r.altweights) : json(nullptr);
  json errs = json::array();
  for (const auto& e : r.errors) errs.push_back({{"stage", e.stage}, {"message", e.message}});
  j["errors"] = std::move(errs);
  json prov;
  prov["tool_version"] = r.provenance.tool_version;
  prov["ipd_digest"] = r.provenance.ipd_digest;
  prov["ad_digest"] = r.provenance.ad_digest;
  if (r.provenance.outcome_digest) prov["outcome_digest"] = *r.provenance.outcome_digest;
  if (r.provenance.seed) prov["seed"] = *r.provenance.seed;
  prov["determinism_hash"] = r.provenance.determinism_hash;
  prov["timestamp"] = r.provenance.timestamp;
  j["provenance"] = std::move(prov);
  return j;
}

/// Exit code contract: 0 Interior, 3 Boundary, 2 Infeasible, 1 when the
/// feasibility stage itself could not run.
inline int exit_code_for(const CheckReport& r) {
  if (!r.feasibility) return 1;
  switch (r.feasibility->status) {
    case HullStatus::Interior: return 0;
    case HullStatus::Boundary: return 3;
    case HullStatus::Infeasible: return 2;
  }
  return 1;
}

/// Runs the recommended workflow: hull check, then PCA, then Hotelling, then
/// the MAIC fit (Interior instances only), then alternative weights when
/// requested. A failing stage is recorded in the report and halts the stages
/// after it. File-level problems (unreadable or malformed inputs) throw
/// instead, since there is nothing to report on.
inline CheckReport run_pipeline(const std::string& ipd_path, const std::string& ad_path,
                                const ReportOptions& opts = {}) {
  CheckReport report;
  report.provenance.ipd_digest = detail::file_digest(ipd_path);
  report.provenance.ad_digest = detail::file_digest(ad_path);
  if (opts.resample_draws) report.provenance.seed = opts.seed;

  IpdMatrix ipd = load_ipd(ipd_path, opts.format);
  AdVector ad = load_ad_aligned(ad_path, ipd, opts.format);
  std::optional<OutcomeVector> outcome;
  if (opts.outcome_path) {
    report.provenance.outcome_digest = detail::file_digest(*opts.outcome_path);
    outcome = load_outcome(*opts.outcome_path, opts.format);
    if (outcome->n() != ipd.n())
      throw ParseError(*opts.outcome_path + ": outcome has " +
                       std::to_string(outcome->n()) + " rows, IPD has " +
                       std::to_string(ipd.n()) + " patients");
  }
  if (!opts.variance_targets.empty()) {
    auto [aug_ipd, aug_ad] = augment_variance_columns(ipd, ad, opts.variance_targets);
    ipd = std::move(aug_ipd);
    ad = std::move(aug_ad);
  }

  bool halted = false;
  const auto stage = [&](const char* name, auto&& body) {
    if (halted) return;
    try {
      body();
    } catch (const std::exception& e) {
      report.errors.push_back({name, e.what()});
      halted = true;
    }
  };

  stage("check", [&] { report.feasibility = check_in_hull(ipd, ad, opts.hull); });
  stage("pca", [&] { report.pca = pca_locate(ipd, ad); });
  stage("t2", [&] {
    report.hotelling.push_back(hotelling_fixed_ad(ipd, ad));
    if (ad.n_ad) report.hotelling.push_back(hotelling_two_sample(ipd, ad));
    if (opts.resample_draws)
      report.hotelling.push_back(hotelling_resampled(
          ipd, ad, HotellingVariant::FixedAd, *opts.resample_draws, opts.seed));
  });
  stage("fit", [&] {
    if (!report.feasibility || report.feasibility->status != HullStatus::Interior)
      return;
    MaicOptions maic = opts.maic;
    maic.hull = opts.hull;
    report.fit = fit_maic(ipd, ad, maic);
    if (outcome) {
      report.weighted_outcome = weighted_outcome_mean(*outcome, report.fit->weights);
      report.outcome_label = outcome->label;
    }
  });
  stage("altweights", [&] {
    if (!opts.run_altweights) return;
    if (!report.feasibility || report.feasibility->status == HullStatus::Infeasible)
      return;
    report.altweights = alternative_weights(ipd, ad, opts.metric, opts.hull);
  });

  report.provenance.timestamp = detail::utc_timestamp();
  {
    // hash the body with the volatile fields blanked
    CheckReport for_hash = report;
    for_hash.provenance.timestamp.clear();
    for_hash.provenance.determinism_hash.clear();
    report.provenance.determinism_hash = fnv1a64_hex(to_json(for_hash).dump());
  }

  if (opts.out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(*opts.out_dir);
    const fs::path dir(*opts.out_dir);
    {
      std::ofstream out(dir / "report.json");
      if (!out) throw Error((dir / "report.json").string() + ": cannot open for writing");
      out << to_json(report).dump(2) << "\n";
    }
    if (opts.write_svgs && report.pca)
      render_pc_dotplot(*report.pca, (dir / "pc_dotplot.svg").string());
    if (opts.write_svgs && report.fit && ipd.p() == 2)
      render_scatter_with_weights(ipd, ad, *report.fit,
                                  (dir / "scatter_weights.svg").string());
  }
  return report;
}

}  // namespace maicfeas
