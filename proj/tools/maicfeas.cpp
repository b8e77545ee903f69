// maicfeas: command-line front end for MAIC numerical feasibility checks.
//
// Exit codes: 0 AD interior to the IPD hull (fit possible), 3 boundary,
// 2 infeasible, 1 input/usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maicfeas/maicfeas.hpp"

namespace {

using namespace maicfeas;

struct CommonArgs {
  std::string ipd_path;
  std::string ad_path;
  std::string delimiter = ",";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--ipd", args.ipd_path, "IPD file: header row of covariate names, one row per patient")
      ->envname("MAICFEAS_IPD")
      ->required();
  cmd->add_option("--ad", args.ad_path, "AD file: name,value rows; reserved name n_ad for the AD sample size")
      ->envname("MAICFEAS_AD")
      ->required();
  cmd->add_option("--delimiter", args.delimiter, "Field delimiter (default ',')")
      ->envname("MAICFEAS_DELIMITER");
}

FormatSpec format_of(const CommonArgs& args) {
  if (args.delimiter.size() != 1)
    throw Error("--delimiter must be a single character");
  return {args.delimiter[0]};
}

std::vector<std::pair<std::string, double>> parse_variance_targets(
    const std::vector<std::string>& raw) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : raw) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos || eq == 0)
      throw Error("--variance expects name=value, got '" + item + "'");
    out.emplace_back(item.substr(0, eq), std::stod(item.substr(eq + 1)));
  }
  return out;
}

void write_weights_csv(const Vec& weights, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << "patient_id,weight\n";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", weights[i]);
    out << (i + 1) << "," << buf << "\n";
  }
}

int verdict_exit(const FeasibilityVerdict& v) {
  switch (v.status) {
    case HullStatus::Interior: return 0;
    case HullStatus::Boundary: return 3;
    case HullStatus::Infeasible: return 2;
  }
  return 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Numerical feasibility checks and weight estimation for "
               "matching-adjusted indirect comparison (MAIC)"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // check
  auto* check_cmd = app.add_subcommand(
      "check", "Decide whether AD lies in the convex hull of the IPD columns");
  CommonArgs check_args;
  add_common(check_cmd, check_args);

  // pca
  auto* pca_cmd = app.add_subcommand(
      "pca", "Project AD into IPD principal-component coordinates");
  CommonArgs pca_args;
  std::string pca_svg;
  add_common(pca_cmd, pca_args);
  pca_cmd->add_option("--svg", pca_svg, "Write the PC dot plot to this path")
      ->envname("MAICFEAS_SVG");

  // t2
  auto* t2_cmd = app.add_subcommand(
      "t2", "Hotelling T² closeness test of AD against the IPD mean");
  CommonArgs t2_args;
  std::string t2_variant = "fixed";
  int t2_resample = 0;
  std::uint64_t t2_seed = 0;
  add_common(t2_cmd, t2_args);
  t2_cmd->add_option("--variant", t2_variant, "fixed | two-sample")
      ->check(CLI::IsMember({"fixed", "two-sample"}))
      ->envname("MAICFEAS_VARIANT");
  t2_cmd->add_option("--resample", t2_resample, "Resampling draws (>= 100) instead of the F reference")
      ->envname("MAICFEAS_RESAMPLE");
  t2_cmd->add_option("--seed", t2_seed, "Resampling seed")->envname("MAICFEAS_SEED");

  // fit
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit MAIC weights (refuses boundary/infeasible instances)");
  CommonArgs fit_args;
  std::string fit_outcome, fit_weights_csv;
  std::vector<std::string> fit_variances;
  add_common(fit_cmd, fit_args);
  fit_cmd->add_option("--outcome", fit_outcome, "Outcome file: label header, one value per patient")
      ->envname("MAICFEAS_OUTCOME");
  fit_cmd->add_option("--variance", fit_variances,
                      "Also match a published variance: name=value (repeatable)")
      ->envname("MAICFEAS_VARIANCE");
  fit_cmd->add_option("--weights-csv", fit_weights_csv, "Write patient_id,weight rows here")
      ->envname("MAICFEAS_WEIGHTS_CSV");

  // altweights
  auto* alt_cmd = app.add_subcommand(
      "altweights", "LP-based alternative weights blended toward patients near AD");
  CommonArgs alt_args;
  std::string alt_metric = "euclidean";
  std::string alt_csv, alt_basis;
  add_common(alt_cmd, alt_args);
  alt_cmd->add_option("--metric", alt_metric, "euclidean | mahalanobis")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}))
      ->envname("MAICFEAS_METRIC");
  alt_cmd->add_option("--csv", alt_csv, "Write the final weights here")
      ->envname("MAICFEAS_CSV");
  alt_cmd->add_option("--basis", alt_basis, "Dump the full n x n basis here (large)")
      ->envname("MAICFEAS_BASIS");

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "Full workflow: check, pca, t2, fit, optional altweights");
  CommonArgs report_args;
  std::string report_outcome, report_out;
  std::vector<std::string> report_variances;
  int report_resample = 0;
  std::uint64_t report_seed = 0;
  bool report_alt = false, report_no_svg = false;
  std::string report_metric = "euclidean";
  add_common(report_cmd, report_args);
  report_cmd->add_option("--outcome", report_outcome, "Outcome file")
      ->envname("MAICFEAS_OUTCOME");
  report_cmd->add_option("--variance", report_variances, "name=value (repeatable)")
      ->envname("MAICFEAS_VARIANCE");
  report_cmd->add_option("--resample", report_resample, "Add a resampled T² with this many draws")
      ->envname("MAICFEAS_RESAMPLE");
  report_cmd->add_option("--seed", report_seed, "Resampling seed")->envname("MAICFEAS_SEED");
  report_cmd->add_flag("--altweights", report_alt, "Also compute alternative weights")
      ->envname("MAICFEAS_ALTWEIGHTS");
  report_cmd->add_option("--metric", report_metric, "Distance metric for --altweights")
      ->check(CLI::IsMember({"euclidean", "mahalanobis"}))
      ->envname("MAICFEAS_METRIC");
  report_cmd->add_option("--out", report_out, "Directory for report.json and SVG plots")
      ->envname("MAICFEAS_OUT");
  report_cmd->add_flag("--no-svg", report_no_svg, "Skip SVG output")
      ->envname("MAICFEAS_NO_SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage errors are exit code 1, whatever CLI11 would pick
  }

  if (check_cmd->parsed()) {
    const FormatSpec fmt = format_of(check_args);
    const IpdMatrix ipd = load_ipd(check_args.ipd_path, fmt);
    const AdVector ad = load_ad_aligned(check_args.ad_path, ipd, fmt);
    const FeasibilityVerdict verdict = check_in_hull(ipd, ad);
    std::cout << to_json(verdict).dump(2) << "\n";
    return verdict_exit(verdict);
  }

  if (pca_cmd->parsed()) {
    const FormatSpec fmt = format_of(pca_args);
    const IpdMatrix ipd = load_ipd(pca_args.ipd_path, fmt);
    const AdVector ad = load_ad_aligned(pca_args.ad_path, ipd, fmt);
    const PcaProjection proj = pca_locate(ipd, ad);
    if (!pca_svg.empty()) render_pc_dotplot(proj, pca_svg);
    std::cout << to_json(proj).dump(2) << "\n";
    return 0;
  }

  if (t2_cmd->parsed()) {
    const FormatSpec fmt = format_of(t2_args);
    const IpdMatrix ipd = load_ipd(t2_args.ipd_path, fmt);
    const AdVector ad = load_ad_aligned(t2_args.ad_path, ipd, fmt);
    const HotellingVariant variant = t2_variant == "fixed" ? HotellingVariant::FixedAd
                                                           : HotellingVariant::TwoSample;
    const HotellingResult result =
        t2_resample > 0
            ? hotelling_resampled(ipd, ad, variant, t2_resample, t2_seed)
            : (variant == HotellingVariant::FixedAd ? hotelling_fixed_ad(ipd, ad)
                                                    : hotelling_two_sample(ipd, ad));
    std::cout << to_json(result).dump(2) << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    const FormatSpec fmt = format_of(fit_args);
    IpdMatrix ipd = load_ipd(fit_args.ipd_path, fmt);
    AdVector ad = load_ad_aligned(fit_args.ad_path, ipd, fmt);
    const auto targets = parse_variance_targets(fit_variances);
    if (!targets.empty()) {
      auto [aug_ipd, aug_ad] = augment_variance_columns(ipd, ad, targets);
      ipd = std::move(aug_ipd);
      ad = std::move(aug_ad);
    }
    const MaicFit fit = fit_maic(ipd, ad);
    json out = to_json(fit);
    if (!fit_outcome.empty()) {
      const OutcomeVector outcome = load_outcome(fit_outcome, fmt);
      out["outcome"] = {{"label", outcome.label},
                        {"weighted_mean", weighted_outcome_mean(outcome, fit.weights)}};
    }
    if (!fit_weights_csv.empty()) write_weights_csv(fit.weights, fit_weights_csv);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (alt_cmd->parsed()) {
    const FormatSpec fmt = format_of(alt_args);
    const IpdMatrix ipd = load_ipd(alt_args.ipd_path, fmt);
    const AdVector ad = load_ad_aligned(alt_args.ad_path, ipd, fmt);
    const DistanceMetric metric = alt_metric == "euclidean" ? DistanceMetric::Euclidean
                                                            : DistanceMetric::Mahalanobis;
    const AltWeightSet set = alternative_weights(ipd, ad, metric);
    if (!alt_csv.empty()) write_weights_csv(set.final, alt_csv);
    if (!alt_basis.empty()) {
      std::ofstream out(alt_basis);
      if (!out) throw Error(alt_basis + ": cannot open for writing");
      for (std::size_t i = 0; i < set.basis.rows(); ++i) {
        for (std::size_t j = 0; j < set.basis.cols(); ++j) {
          char buf[40];
          std::snprintf(buf, sizeof(buf), "%.17g", set.basis(i, j));
          out << (j ? "," : "") << buf;
        }
        out << "\n";
      }
    }
    std::cout << altweights_summary_json(set).dump(2) << "\n";
    return 0;
  }

  // report
  const FormatSpec fmt = format_of(report_args);
  ReportOptions opts;
  opts.format = fmt;
  if (!report_outcome.empty()) opts.outcome_path = report_outcome;
  opts.variance_targets = parse_variance_targets(report_variances);
  if (report_resample > 0) opts.resample_draws = report_resample;
  opts.seed = report_seed;
  opts.run_altweights = report_alt;
  opts.metric = report_metric == "euclidean" ? DistanceMetric::Euclidean
                                             : DistanceMetric::Mahalanobis;
  if (!report_out.empty()) opts.out_dir = report_out;
  opts.write_svgs = !report_no_svg;
  const CheckReport report = run_pipeline(report_args.ipd_path, report_args.ad_path, opts);
  std::cout << to_json(report).dump(2) << "\n";
  return exit_code_for(report);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const maicfeas::FeasibilityError& e) {
    std::cerr << "maicfeas: " << e.what() << "\n";
    return verdict_exit(e.verdict);
  } catch (const std::exception& e) {
    std::cerr << "maicfeas: " << e.what() << "\n";
    return 1;
  }
}
