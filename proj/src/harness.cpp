#include "harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "errors.hpp"
#include "evaluators.hpp"
#include "quadrature.hpp"

namespace nearsing {

namespace {

using nlohmann::json;

std::string gshort(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string rho_set_string(const std::vector<double>& rhos) {
  std::string s;
  for (size_t i = 0; i < rhos.size(); ++i) {
    if (i) s += ';';
    s += gshort(rhos[i]);
  }
  return s;
}

std::string delta_rule_string(const RunConfig& cfg) {
  if (cfg.delta_rule == DeltaRule::Proportional) return "proportional";
  return "fractional-q" + gshort(cfg.fractional_q) + "-anchor" + gshort(cfg.anchor_h);
}

// "stem.csv" + index 2 -> "stem-r2.csv"
std::string path_with_index(const std::string& path, size_t index) {
  const std::string tag = "-r" + std::to_string(index);
  const size_t slash = path.find_last_of('/');
  const size_t dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_write(const std::string& path, const char* what) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) fail(ErrorCode::Io, "harness", std::string("cannot open ") + what + ": " + path);
  return f;
}

double ls_slope_loglog(const std::vector<double>& hs, const std::vector<double>& errs) {
  const size_t count = std::min(hs.size(), errs.size());
  if (count < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(count);
  for (size_t i = 0; i < count; ++i) {
    if (!(errs[i] > 0.0)) return 0.0;
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace

std::vector<Vec3> select_targets(const ImplicitSurface& surface, double h,
                                 const SelectionConfig& selection) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "target-selection", "h must be positive");
  if (selection.mode == SelectionMode::Shell && selection.shell_m < 1)
    fail(ErrorCode::InvalidArgument, "target-selection", "shell multiplier must be >= 1");

  const double reach =
      (selection.mode == SelectionMode::Shell ? selection.shell_m + 1.0 : 1.0) * h;
  const Box3 box = surface.bounding_box();
  const double tol_b = 1e-12 * box.diameter();
  const double inflate = reach + 2.0 * h;

  const auto lo_index = [&](double c) { return static_cast<long>(std::ceil((c - inflate) / h)); };
  const auto hi_index = [&](double c) { return static_cast<long>(std::floor((c + inflate) / h)); };
  const long i0 = lo_index(box.lo.x), i1 = hi_index(box.hi.x);
  const long j0 = lo_index(box.lo.y), j1 = hi_index(box.hi.y);
  const long k0 = lo_index(box.lo.z), k1 = hi_index(box.hi.z);

  std::vector<Vec3> targets;
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      for (long k = k0; k <= k1; ++k) {
        const Vec3 y{i * h, j * h, k * h};
        if (selection.octant && (y.x < 0.0 || y.y < 0.0 || y.z < 0.0)) continue;
        // Cheap first-order distance estimate weeds out all but a thin shell
        // of candidates before the exact projection.
        const double p = surface.phi(y);
        const double g = norm(surface.grad(y));
        if (std::abs(p) > 2.0 * reach * std::max(g, 1e-300)) continue;
        const NearFrame frame = closest_point(surface, y);
        const double ab = std::abs(frame.b);
        bool keep;
        if (selection.mode == SelectionMode::Band) {
          keep = ab <= reach + tol_b;
        } else {
          keep = ab > selection.shell_m * h && ab <= reach + tol_b;
        }
        if (!keep) continue;
        if (selection.side == TargetSide::Inside && !(frame.b < 0.0)) continue;
        if (selection.side == TargetSide::Outside && !(frame.b > 0.0)) continue;
        targets.push_back(y);
      }
    }
  }
  if (targets.empty())
    fail(ErrorCode::EmptySelection, "target-selection",
         "no grid targets satisfy the selection at h = " + gshort(h));
  return targets;
}

RunConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Config, "config", "config must be a JSON object");

  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "case") {
        cfg.case_name = value.get<std::string>();
      } else if (key == "h") {
        cfg.hs.clear();
        if (value.is_array())
          for (const auto& v : value) cfg.hs.push_back(v.get<double>());
        else
          cfg.hs.push_back(value.get<double>());
      } else if (key == "rho") {
        cfg.rhos.clear();
        for (const auto& v : value) cfg.rhos.push_back(v.get<double>());
      } else if (key == "order") {
        cfg.order = value.get<int>();
      } else if (key == "delta_rule") {
        const auto s = value.get<std::string>();
        if (s == "proportional")
          cfg.delta_rule = DeltaRule::Proportional;
        else if (s == "fractional")
          cfg.delta_rule = DeltaRule::Fractional;
        else
          fail(ErrorCode::Config, "config", "delta_rule must be proportional or fractional");
      } else if (key == "q") {
        cfg.fractional_q = value.get<double>();
      } else if (key == "anchor_h") {
        cfg.anchor_h = value.get<double>();
      } else if (key == "far_cutoff") {
        cfg.far_cutoff = value.get<double>();
      } else if (key == "selection") {
        const auto s = value.get<std::string>();
        if (s == "band")
          cfg.selection = SelectionMode::Band;
        else if (s == "shell")
          cfg.selection = SelectionMode::Shell;
        else
          fail(ErrorCode::Config, "config", "selection must be band or shell");
      } else if (key == "shell_m") {
        cfg.shell_m = value.get<int>();
      } else if (key == "octant") {
        cfg.octant = value.get<bool>();
      } else if (key == "side") {
        const auto s = value.get<std::string>();
        if (s == "both")
          cfg.side = TargetSide::Both;
        else if (s == "inside")
          cfg.side = TargetSide::Inside;
        else if (s == "outside")
          cfg.side = TargetSide::Outside;
        else
          fail(ErrorCode::Config, "config", "side must be both, inside, or outside");
      } else if (key == "baseline") {
        cfg.baseline = value.get<bool>();
      } else if (key == "timing") {
        cfg.timing = value.get<bool>();
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else if (key == "out") {
        cfg.out_csv = value.get<std::string>();
      } else if (key == "targets_out") {
        cfg.targets_out = value.get<std::string>();
      } else if (key == "plot_out") {
        cfg.plot_out = value.get<std::string>();
      } else if (key == "nodes_out") {
        cfg.nodes_out = value.get<std::string>();
      } else {
        fail(ErrorCode::Config, "config", "unknown config key: " + key);
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "config", std::string("bad value type: ") + e.what());
  }
  return cfg;
}

ErrorReport run(const RunConfig& cfg) {
  if (cfg.hs.empty()) fail(ErrorCode::Config, "harness", "h list is empty");
  for (size_t i = 0; i < cfg.hs.size(); ++i) {
    if (!(cfg.hs[i] > 0.0)) fail(ErrorCode::Config, "harness", "h values must be positive");
    if (i > 0 && !(cfg.hs[i] < cfg.hs[i - 1]))
      fail(ErrorCode::Config, "harness", "h values must be strictly descending");
  }
  if (cfg.threads < 1) fail(ErrorCode::Config, "harness", "threads must be >= 1");
  if (!cfg.plot_out.empty() && cfg.out_csv.empty())
    fail(ErrorCode::Config, "harness", "plot output requires a CSV output path");

  TestCase tc = make_case(cfg.case_name);

  const TargetSide side = cfg.side.value_or(
      tc.valid_region == ValidRegion::InsideOnly ? TargetSide::Inside : TargetSide::Both);
  if (tc.valid_region == ValidRegion::InsideOnly && side != TargetSide::Inside)
    fail(ErrorCode::OutOfRegion, "harness",
         "case " + tc.name + " has a reference solution only at interior targets");

  SelectionConfig sel;
  sel.mode = cfg.selection;
  sel.shell_m = cfg.shell_m;
  sel.octant = cfg.octant.value_or(tc.default_first_octant);
  sel.side = side;

  ExtrapolationPlan plan;
  plan.rhos = cfg.rhos;
  plan.order = cfg.order;
  plan.rule = cfg.delta_rule;
  plan.fractional_q = cfg.fractional_q;
  plan.anchor_h = cfg.anchor_h;
  plan.far_cutoff = cfg.far_cutoff;
  plan.validate();

  ErrorReport report;
  report.case_name = tc.name;
  const std::string rho_str = rho_set_string(cfg.rhos);
  const std::string rule_str = delta_rule_string(cfg);

  std::vector<RunRow> main_rows, base_rows;
  std::vector<double> main_errs, base_errs;

  for (size_t hi = 0; hi < cfg.hs.size(); ++hi) {
    const double h = cfg.hs[hi];
    const QuadratureRule rule = generate_rule(*tc.surface, h);
    if (!cfg.nodes_out.empty()) dump_nodes_csv(rule, path_with_index(cfg.nodes_out, hi));
    const std::vector<Vec3> targets = select_targets(*tc.surface, h, sel);

    BatchProblem pb;
    pb.family = tc.family;
    pb.surface = tc.surface.get();
    pb.rule = &rule;
    pb.plan = plan;
    pb.f_scalar = tc.f_scalar;
    pb.g_scalar = tc.g_scalar;
    pb.f_vector = tc.f_vector;
    pb.q_vector = tc.q_vector;
    pb.threads = cfg.threads;

    const int passes = cfg.baseline ? 2 : 1;
    for (int pass = 0; pass < passes; ++pass) {
      pb.baseline = (pass == 1);
      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<TargetResult> results = evaluate_batch(pb, targets);
      const auto t1 = std::chrono::steady_clock::now();

      double sum_e2 = 0.0, max_e = 0.0, sum_x2 = 0.0, max_x = 0.0;
      std::vector<double> errs(targets.size());
      for (size_t t = 0; t < targets.size(); ++t) {
        const Vec3 exact = tc.exact(targets[t], results[t].frame);
        const double e = norm(results[t].value - exact);
        const double xm = norm(exact);
        errs[t] = e;
        sum_e2 += e * e;
        max_e = std::max(max_e, e);
        sum_x2 += xm * xm;
        max_x = std::max(max_x, xm);
      }
      const double inv_n = 1.0 / static_cast<double>(targets.size());

      RunRow row;
      row.h = h;
      row.order = pb.baseline ? 0 : cfg.order;
      row.rho_set = rho_str;
      row.delta_rule = rule_str;
      row.n_targets = targets.size();
      row.l2_err = std::sqrt(sum_e2 * inv_n);
      row.max_err = max_e;
      row.l2_exact = std::sqrt(sum_x2 * inv_n);
      row.max_exact = max_x;
      row.seconds = cfg.timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;

      if (pb.baseline) {
        base_rows.push_back(row);
        base_errs.push_back(row.l2_err);
      } else {
        main_rows.push_back(row);
        main_errs.push_back(row.l2_err);
        if (!cfg.targets_out.empty()) {
          FilePtr f = open_for_write(path_with_index(cfg.targets_out, hi), "target dump");
          std::fprintf(f.get(), "y1,y2,y3,b,err\n");
          for (size_t t = 0; t < targets.size(); ++t)
            std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g\n", targets[t].x, targets[t].y,
                         targets[t].z, results[t].frame.b, errs[t]);
        }
      }
    }
  }

  for (size_t i = 0; i + 1 < main_rows.size(); ++i) {
    const double e0 = main_errs[i], e1 = main_errs[i + 1];
    const double h0 = cfg.hs[i], h1 = cfg.hs[i + 1];
    report.pair_orders.push_back((e0 > 0 && e1 > 0) ? std::log(e0 / e1) / std::log(h0 / h1) : 0.0);
  }
  report.fitted_l2_order = ls_slope_loglog(cfg.hs, main_errs);
  report.baseline_fitted_l2_order = ls_slope_loglog(cfg.hs, base_errs);

  report.rows = std::move(main_rows);
  report.rows.insert(report.rows.end(), base_rows.begin(), base_rows.end());
  report.csv_path = cfg.out_csv;

  if (!cfg.out_csv.empty()) {
    FilePtr f = open_for_write(cfg.out_csv, "CSV output");
    std::fprintf(f.get(),
                 "case,h,order,rho_set,delta_rule,n_targets,l2_err,max_err,l2_exact,max_exact,"
                 "seconds\n");
    for (const RunRow& r : report.rows)
      std::fprintf(f.get(), "%s,%.17g,%d,%s,%s,%zu,%.17g,%.17g,%.17g,%.17g,%.3f\n",
                   report.case_name.c_str(), r.h, r.order, r.rho_set.c_str(),
                   r.delta_rule.c_str(), r.n_targets, r.l2_err, r.max_err, r.l2_exact, r.max_exact,
                   r.seconds);
  }
  if (!cfg.plot_out.empty()) emit_plot_script(report, cfg.out_csv, cfg.plot_out);
  return report;
}

void emit_plot_script(const ErrorReport& report, const std::string& csv_path,
                      const std::string& path) {
  if (report.rows.empty()) fail(ErrorCode::InvalidArgument, "harness", "empty report");
  // Scale the reference slopes through the finest extrapolated data point.
  double href = 1.0, eref = 1.0;
  for (const RunRow& r : report.rows) {
    if (r.order > 0 && r.l2_err > 0.0) {
      href = r.h;
      eref = r.l2_err;
    }
  }
  const double c5 = eref / std::pow(href, 5.0);
  const double c4 = eref / std::pow(href, 4.0);

  FilePtr f = open_for_write(path, "plot script");
  std::fprintf(f.get(), "# gnuplot script: error vs h for case %s\n", report.case_name.c_str());
  std::fprintf(f.get(), "set datafile separator ','\n");
  std::fprintf(f.get(), "set logscale xy\n");
  std::fprintf(f.get(), "set xlabel 'h' noenhanced\n");
  std::fprintf(f.get(), "set ylabel 'error' noenhanced\n");
  std::fprintf(f.get(), "set key left top noenhanced\n");
  std::fprintf(f.get(), "set title '%s' noenhanced\n", report.case_name.c_str());
  std::fprintf(f.get(),
               "plot '%s' using (column('order')>0?column('h'):NaN):(column('l2_err')) "
               "with linespoints title 'l2_err', \\\n"
               "     '' using (column('order')>0?column('h'):NaN):(column('max_err')) "
               "with linespoints title 'max_err', \\\n"
               "     '' using (column('order')==0?column('h'):NaN):(column('l2_err')) "
               "with linespoints title 'l2_err (no regularization)', \\\n"
               "     %.6g*x**5 with lines dashtype 2 title 'h^5', \\\n"
               "     %.6g*x**4 with lines dashtype 3 title 'h^4'\n",
               csv_path.c_str(), c5, c4);
}

std::string ErrorReport::to_json() const {
  json j;
  j["case"] = case_name;
  j["rows"] = json::array();
  for (const RunRow& r : rows) {
    json row;
    row["h"] = r.h;
    row["order"] = r.order;
    row["rho_set"] = r.rho_set;
    row["delta_rule"] = r.delta_rule;
    row["n_targets"] = r.n_targets;
    row["l2_err"] = r.l2_err;
    row["max_err"] = r.max_err;
    row["l2_exact"] = r.l2_exact;
    row["max_exact"] = r.max_exact;
    row["seconds"] = r.seconds;
    j["rows"].push_back(row);
  }
  j["pair_orders"] = pair_orders;
  j["fitted_l2_order"] = fitted_l2_order;
  j["baseline_fitted_l2_order"] = baseline_fitted_l2_order;
  j["csv"] = csv_path;
  return j.dump(2);
}

}  // namespace nearsing
