#pragma once

// Convergence-study driver: builds rules, selects grid targets near the
// surface, evaluates a reference case across an h sweep, and reports error
// norms, fitted convergence orders, and CSV / plot-script outputs.

#include <optional>
#include <string>
#include <vector>

#include "extrapolation.hpp"
#include "geometry.hpp"
#include "reference.hpp"

namespace nearsing {

enum class SelectionMode {
  Band,   // |b| <= h
  Shell,  // m h < |b| <= (m+1) h
};

enum class TargetSide { Both, Inside, Outside };

struct SelectionConfig {
  SelectionMode mode = SelectionMode::Band;
  int shell_m = 1;             // used when mode == Shell
  bool octant = false;         // keep only targets with all coordinates >= 0
  TargetSide side = TargetSide::Both;
};

struct RunConfig {
  std::string case_name = "sphere-single";
  std::vector<double> hs = {1.0 / 32.0, 1.0 / 48.0, 1.0 / 64.0};

  std::vector<double> rhos = {2.0, 3.0, 4.0};
  int order = 5;
  DeltaRule delta_rule = DeltaRule::Proportional;
  double fractional_q = 4.0 / 5.0;
  double anchor_h = 1.0 / 64.0;
  double far_cutoff = 4.0;

  SelectionMode selection = SelectionMode::Band;
  int shell_m = 1;
  std::optional<bool> octant;      // default: per-case
  std::optional<TargetSide> side;  // default: per-case (inside-only cases)

  bool baseline = false;  // additionally run without regularization
  bool timing = false;    // report wall seconds (off keeps CSV deterministic)
  int threads = 1;

  std::string out_csv;      // summary CSV path ("" = don't write)
  std::string targets_out;  // per-target dump path stem ("" = don't write)
  std::string plot_out;     // plot script path ("" = don't write)
  std::string nodes_out;    // quadrature node dump path stem ("" = don't write)
};

// Parses a flat JSON object; every key optional, unknown keys rejected.
RunConfig parse_config_json(const std::string& text);

struct RunRow {
  double h = 0.0;
  int order = 0;  // extrapolation order; 0 marks an unregularized baseline row
  std::string rho_set;
  std::string delta_rule;
  size_t n_targets = 0;
  double l2_err = 0.0, max_err = 0.0;
  double l2_exact = 0.0, max_exact = 0.0;
  double seconds = 0.0;
};

struct ErrorReport {
  std::string case_name;
  std::vector<RunRow> rows;           // extrapolated rows first, then baseline
  std::vector<double> pair_orders;    // log-ratio orders, consecutive h pairs
  double fitted_l2_order = 0.0;       // least-squares slope over the h sweep
  double baseline_fitted_l2_order = 0.0;  // 0 when no baseline requested
  std::string csv_path;

  std::string to_json() const;
};

// All grid points (i h, j h, k h) inside the surface's bounding box inflated
// by the selection reach, whose signed distance and position satisfy the
// selection predicates; deterministic lexicographic (i, j, k) order.  Throws
// EmptySelection if nothing qualifies.
std::vector<Vec3> select_targets(const ImplicitSurface& surface, double h,
                                 const SelectionConfig& selection);

ErrorReport run(const RunConfig& config);

// Gnuplot script plotting l2/max error vs h (log-log) with reference slopes,
// addressing the CSV columns by header name.
void emit_plot_script(const ErrorReport& report, const std::string& csv_path,
                      const std::string& path);

}  // namespace nearsing
