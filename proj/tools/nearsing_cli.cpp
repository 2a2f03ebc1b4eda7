// Command-line convergence harness over the public nearsing C API.
//
// Builds a flat JSON config from an optional config file plus flag overrides,
// hands it to nearsing_run_json, and prints the per-h error table with fitted
// convergence orders.  Exit codes: 0 success, 1 configuration error,
// 2 numerical failure.

#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nearsing.h"

using nlohmann::json;

namespace {

int fail_config(const std::string& message) {
  std::fprintf(stderr, "config error: %s\n", message.c_str());
  return 1;
}

// Non-finite values reach the report as JSON null; print them as nan.
double num(const json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

void print_report(const json& report) {
  std::printf("case: %s\n", report.value("case", std::string("?")).c_str());
  std::printf("%12s %6s %10s %14s %14s %14s %14s %9s\n", "h", "order", "targets", "l2_err",
              "max_err", "l2_exact", "max_exact", "seconds");
  for (const auto& row : report["rows"]) {
    std::printf("%12.8g %6d %10zu %14.6e %14.6e %14.6g %14.6g %9.3f\n", num(row["h"]),
                row["order"].get<int>(), row["n_targets"].get<size_t>(), num(row["l2_err"]),
                num(row["max_err"]), num(row["l2_exact"]), num(row["max_exact"]),
                num(row["seconds"]));
  }
  if (report.contains("pair_orders") && !report["pair_orders"].empty()) {
    std::printf("pairwise l2 orders:");
    for (const auto& p : report["pair_orders"]) std::printf(" %.3f", num(p));
    std::printf("\n");
  }
  std::printf("fitted l2 order: %.3f\n", num(report["fitted_l2_order"]));
  const double b = num(report["baseline_fitted_l2_order"]);
  if (b != 0.0) std::printf("baseline fitted l2 order: %.3f\n", b);
  const std::string csv = report.value("csv", std::string());
  if (!csv.empty()) std::printf("csv written: %s\n", csv.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nearsing convergence harness"};
  app.set_help_flag("--help", "print help and exit");

  std::string config_path, case_name, side, delta_rule, out_csv, targets_out, plot_out, nodes_out;
  std::vector<double> hs, rhos;
  int order = 0, shell_m = 0, threads = 0;
  double q = 0.0, anchor_h = 0.0, far_cutoff = 0.0;
  bool band = false, baseline = false, timing = false;
  bool octant = false, no_octant = false;

  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  app.add_option("--case", case_name, "reference case name");
  app.add_option("--h", hs, "grid spacings, strictly descending");
  app.add_option("--rho", rhos, "width multipliers (3 for order 5, 4 for order 7)");
  app.add_option("--order", order, "extrapolation order: 5 or 7");
  app.add_option("--delta-rule", delta_rule, "width rule: proportional or fractional");
  app.add_option("--q", q, "fractional width exponent");
  app.add_option("--anchor-h", anchor_h, "fractional width anchor spacing");
  app.add_option("--far-cutoff", far_cutoff, "widths of distance beyond which no extrapolation");
  auto* band_flag = app.add_flag("--band", band, "select grid targets with |b| <= h (default)");
  auto* shell_opt =
      app.add_option("--shell", shell_m, "select shell m: targets with m h < |b| <= (m+1) h");
  shell_opt->excludes(band_flag);
  app.add_flag("--octant", octant, "keep only first-octant targets");
  app.add_flag("--no-octant", no_octant, "keep targets in all octants");
  app.add_option("--side", side, "target side: both, inside, or outside");
  app.add_flag("--baseline", baseline, "also evaluate without regularization");
  app.add_flag("--timing", timing, "report wall-clock seconds (off: deterministic output)");
  app.add_option("--out", out_csv, "summary CSV path");
  app.add_option("--dump-targets", targets_out, "per-target CSV dump path stem");
  app.add_option("--dump-nodes", nodes_out, "quadrature node CSV dump path stem");
  app.add_option("--plot", plot_out, "gnuplot script path (requires --out)");
  app.add_option("--threads", threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) return fail_config("cannot read config file: " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      cfg = json::parse(ss.str());
    } catch (const json::exception& e) {
      return fail_config(std::string("invalid JSON in ") + config_path + ": " + e.what());
    }
    if (!cfg.is_object()) return fail_config("config file must hold a JSON object");
  }

  if (app.count("--case")) cfg["case"] = case_name;
  if (app.count("--h")) cfg["h"] = hs;
  if (app.count("--rho")) cfg["rho"] = rhos;
  if (app.count("--order")) cfg["order"] = order;
  if (app.count("--delta-rule")) cfg["delta_rule"] = delta_rule;
  if (app.count("--q")) cfg["q"] = q;
  if (app.count("--anchor-h")) cfg["anchor_h"] = anchor_h;
  if (app.count("--far-cutoff")) cfg["far_cutoff"] = far_cutoff;
  if (app.count("--band")) cfg["selection"] = "band";
  if (app.count("--shell")) {
    cfg["selection"] = "shell";
    cfg["shell_m"] = shell_m;
  }
  if (app.count("--octant")) cfg["octant"] = true;
  if (app.count("--no-octant")) cfg["octant"] = false;
  if (app.count("--side")) cfg["side"] = side;
  if (app.count("--baseline")) cfg["baseline"] = true;
  if (app.count("--timing")) cfg["timing"] = true;
  if (app.count("--out")) cfg["out"] = out_csv;
  if (app.count("--dump-targets")) cfg["targets_out"] = targets_out;
  if (app.count("--dump-nodes")) cfg["nodes_out"] = nodes_out;
  if (app.count("--plot")) cfg["plot_out"] = plot_out;
  if (app.count("--threads")) cfg["threads"] = threads;

  char* report_text = nullptr;
  const nearsing_status status = nearsing_run_json(cfg.dump().c_str(), &report_text);
  if (status != NEARSING_OK) {
    const char* message = nearsing_last_error();
    if (status == NEARSING_ERR_CONFIG || status == NEARSING_ERR_INVALID_ARGUMENT)
      return fail_config(message);
    std::fprintf(stderr, "error: %s\n", message);
    return 2;
  }

  int rc = 0;
  try {
    print_report(json::parse(report_text));
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: malformed report: %s\n", e.what());
    rc = 2;
  }
  nearsing_string_free(report_text);
  return rc;
}
