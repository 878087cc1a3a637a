// Benchmark and solver front end.
//
// Exit codes: 0 success / assertions pass, 1 assertion failure,
// 2 usage error, 3 numerical failure.

#include "CLI11.hpp"
#include "json.hpp"

#include "gss/agss.hpp"
#include "gss/core.hpp"
#include "gss/flow.hpp"
#include "gss/harness.hpp"
#include "gss/saddle.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <sstream>

namespace {

using gss::ConvergenceTrace;
using nlohmann::json;

struct MethodEntry {
  enum class Family { flow, agss, saddle } family;
  gss::FlowMethod flow{};
  gss::AgssScheme agss{};
  gss::SaddleScheme saddle{};
};

const std::map<std::string, MethodEntry>& method_table() {
  using F = MethodEntry::Family;
  static const std::map<std::string, MethodEntry> table = {
      {"explicit_euler", {F::flow, gss::FlowMethod::explicit_euler, {}, {}}},
      {"implicit_euler", {F::flow, gss::FlowMethod::implicit_euler, {}, {}}},
      {"aor", {F::flow, gss::FlowMethod::aor, {}, {}}},
      {"gss", {F::flow, gss::FlowMethod::gss, {}, {}}},
      {"hss", {F::flow, gss::FlowMethod::hss, {}, {}}},
      {"agss_imex", {F::agss, {}, gss::AgssScheme::imex, {}}},
      {"agss_imex_inexact", {F::agss, {}, gss::AgssScheme::imex_inexact, {}}},
      {"agss_explicit", {F::agss, {}, gss::AgssScheme::explicit_agss, {}}},
      {"saddle_agss", {F::saddle, {}, {}, gss::SaddleScheme::agss}},
      {"saddle_imex", {F::saddle, {}, {}, gss::SaddleScheme::imex}},
      {"saddle_prox", {F::saddle, {}, {}, gss::SaddleScheme::prox}},
      {"tpd_gss", {F::saddle, {}, {}, gss::SaddleScheme::tpd_gss}},
      {"atpd", {F::saddle, {}, {}, gss::SaddleScheme::atpd}},
  };
  return table;
}

bool is_saddle_kind(gss::ProblemKind k) {
  return k == gss::ProblemKind::bilinear_saddle ||
         k == gss::ProblemKind::constrained_qp;
}

struct RunResult {
  ConvergenceTrace trace;
  double final_residual = 0.0;
  long inner_iters = 0;
};

RunResult run_method(const gss::ProblemSpec& spec, const MethodEntry& entry,
                     double alpha, long max_iter, double tol) {
  RunResult out;
  if (entry.family == MethodEntry::Family::saddle) {
    if (!is_saddle_kind(spec.kind))
      throw std::invalid_argument("saddle method needs a saddle problem kind");
    const gss::SaddleProblem p = gss::generate_saddle(spec);
    const gss::SchurSpectrum sp = gss::schur_spectrum(p);
    gss::SaddleOptions opts;
    opts.config.max_iter = max_iter;
    opts.config.stop_tol = tol;
    if (alpha > 0.0) {
      opts.config.alpha = alpha;
    } else if (entry.saddle == gss::SaddleScheme::tpd_gss ||
               entry.saddle == gss::SaddleScheme::atpd) {
      const gss::GsOracles gS = gss::build_gS(p, sp);
      opts.config.alpha =
          gss::default_alpha(entry.saddle, p, sp, &gS.constants);
    } else {
      opts.config.alpha = gss::default_alpha(entry.saddle, p, sp, nullptr);
    }
    const gss::SaddleResult r = gss::solve_saddle(
        p, entry.saddle, gss::Vec::Zero(p.m), gss::Vec::Zero(p.n), opts);
    out.trace = r.trace;
    out.final_residual = p.kkt_residual(r.u, r.p);
    out.inner_iters = r.total_inner_iters;
    return out;
  }

  if (is_saddle_kind(spec.kind))
    throw std::invalid_argument("monotone method needs a monotone problem kind");
  const gss::MonotoneProblem p = gss::generate_monotone(spec);
  const gss::SkewSplit split = gss::split_skew(p.N);
  if (entry.family == MethodEntry::Family::flow) {
    gss::FlowOptions opts;
    opts.config.max_iter = max_iter;
    opts.config.stop_tol = tol;
    opts.config.alpha = alpha;  // 0 = theorem default inside solve_flow
    if (entry.flow == gss::FlowMethod::hss ||
        entry.flow == gss::FlowMethod::implicit_euler) {
      // Linear data: probe the gradient (exact for the linear/quadratic kinds).
      gss::Mat H(p.dim, p.dim);
      const gss::Vec g0 = p.grad_F(gss::Vec::Zero(p.dim));
      for (Eigen::Index j = 0; j < p.dim; ++j) {
        gss::Vec e = gss::Vec::Zero(p.dim);
        e[j] = 1.0;
        H.col(j) = p.grad_F(e) - g0;
      }
      opts.A_linear = H + p.N;
      opts.b_linear = -g0;
    }
    const gss::FlowResult r =
        gss::solve_flow(p, split, entry.flow, gss::Vec::Zero(p.dim), opts);
    out.trace = r.trace;
    out.final_residual = p.residual_norm(r.x);
    return out;
  }
  gss::AgssOptions opts;
  opts.config.max_iter = max_iter;
  opts.config.stop_tol = tol;
  opts.config.alpha =
      alpha > 0.0 ? alpha : gss::default_alpha(entry.agss, p, split);
  const gss::AgssResult r =
      gss::solve_agss(p, split, entry.agss, gss::Vec::Zero(p.dim), opts);
  out.trace = r.trace;
  out.final_residual = p.residual_norm(r.state.x);
  out.inner_iters = r.total_inner_iters;
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew-symmetric splitting and accelerated solver benchmarks"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Run one method on one problem");
  std::string problem_path, method_name = "gss", trace_path, alpha_arg = "auto";
  long max_iter = 100000;
  double tol = 1e-10;
  solve->add_option("--problem", problem_path, "Problem spec JSON file")
      ->required();
  solve->add_option("--method", method_name, "Method name");
  solve->add_option("--alpha", alpha_arg, "Step size: 'auto' or a number");
  solve->add_option("--max-iter", max_iter, "Iteration cap");
  solve->add_option("--tol", tol, "Residual stopping tolerance");
  solve->add_option("--trace", trace_path, "Write per-step CSV trace here");

  // bench
  auto* bench = app.add_subcommand("bench", "Run an assertion suite");
  std::string suite_name, report_path;
  bench->add_option("--suite", suite_name, "Suite name")->required();
  bench->add_option("--out", report_path, "Write JSON report here");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Iteration counts vs condition number for one method");
  std::string sweep_kind = "quadratic_plus_skew", kappa_list = "100,1000",
              sweep_method = "gss", sweep_out;
  sweep->add_option("--kind", sweep_kind, "Problem kind");
  sweep->add_option("--kappa-list", kappa_list, "Comma-separated kappa_F list");
  sweep->add_option("--method", sweep_method, "Method name");
  sweep->add_option("--out", sweep_out, "Write JSON results here");

  // compare
  auto* compare =
      app.add_subcommand("compare", "Run several methods on one problem");
  std::string cmp_problem, cmp_methods = "gss,agss_imex";
  compare->add_option("--problem", cmp_problem, "Problem spec JSON file")
      ->required();
  compare->add_option("--methods", cmp_methods, "Comma-separated method names");
  compare->add_option("--max-iter", max_iter, "Iteration cap");
  compare->add_option("--tol", tol, "Residual stopping tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      const auto it = method_table().find(method_name);
      if (it == method_table().end()) {
        std::cerr << "unknown method: " << method_name << "\n";
        return 2;
      }
      double alpha = 0.0;
      if (alpha_arg != "auto") {
        try {
          alpha = std::stod(alpha_arg);
        } catch (const std::exception&) {
          std::cerr << "bad --alpha value: " << alpha_arg << "\n";
          return 2;
        }
        if (alpha <= 0.0) {
          std::cerr << "--alpha must be positive or 'auto'\n";
          return 2;
        }
      }
      const gss::ProblemSpec spec = gss::load_spec(problem_path);
      const RunResult r = run_method(spec, it->second, alpha, max_iter, tol);
      if (!trace_path.empty()) gss::write_trace_csv(trace_path, r.trace);
      const gss::RateFit fit = gss::estimate_rate(r.trace);
      json j;
      j["method"] = method_name;
      j["iterations"] = r.trace.iterations();
      j["final_residual"] = r.final_residual;
      j["fitted_rate"] = fit.rho_hat;
      j["r_squared"] = fit.r_squared;
      j["inner_iterations"] = r.inner_iters;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (*bench) {
      const gss::BenchReport rep = gss::run_benchmark(suite_name);
      const std::string text = rep.to_json();
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
          std::cerr << "cannot write " << report_path << "\n";
          return 2;
        }
        out << text << "\n";
      }
      std::cout << text << "\n";
      for (const auto& a : rep.assertions)
        std::cerr << (a.pass ? "PASS " : "FAIL ") << a.name
                  << " observed=" << a.observed << " expected=" << a.expected
                  << "\n";
      return rep.pass() ? 0 : 1;
    }

    if (*sweep) {
      const auto it = method_table().find(sweep_method);
      if (it == method_table().end()) {
        std::cerr << "unknown method: " << sweep_method << "\n";
        return 2;
      }
      json rows = json::array();
      std::vector<double> kappas, iters;
      for (const std::string& tok : split_list(kappa_list)) {
        gss::ProblemSpec spec;
        spec.kind = gss::problem_kind_from_string(sweep_kind);
        spec.dim = 30;
        spec.m = 40;
        spec.n = 20;
        spec.mu = 1.0;
        spec.kappa_F = std::stod(tok);
        spec.kappa_Bsym = 2.0;
        spec.seed = 5;
        const RunResult r = run_method(spec, it->second, 0.0, 3000000, 1e-8);
        kappas.push_back(spec.kappa_F);
        iters.push_back(static_cast<double>(r.trace.iterations()));
        rows.push_back({{"kappa_F", spec.kappa_F},
                        {"iterations", r.trace.iterations()},
                        {"final_residual", r.final_residual}});
      }
      std::ostringstream csv;
      csv << "kappa_F,iterations,final_residual\n";
      csv << std::setprecision(17);
      for (const auto& row : rows)
        csv << row.at("kappa_F").get<double>() << ','
            << row.at("iterations").get<long>() << ','
            << row.at("final_residual").get<double>() << '\n';
      if (!sweep_out.empty()) {
        std::ofstream out(sweep_out);
        if (!out) {
          std::cerr << "cannot write " << sweep_out << "\n";
          return 2;
        }
        out << csv.str();
      }
      std::cout << csv.str();
      if (kappas.size() >= 2)
        std::cerr << "loglog_slope=" << gss::loglog_slope(kappas, iters)
                  << "\n";
      return 0;
    }

    if (*compare) {
      const gss::ProblemSpec spec = gss::load_spec(cmp_problem);
      json rows = json::array();
      for (const std::string& name : split_list(cmp_methods)) {
        const auto it = method_table().find(name);
        if (it == method_table().end()) {
          std::cerr << "unknown method: " << name << "\n";
          return 2;
        }
        const RunResult r = run_method(spec, it->second, 0.0, max_iter, tol);
        const gss::RateFit fit = gss::estimate_rate(r.trace);
        rows.push_back({{"method", name},
                        {"iterations", r.trace.iterations()},
                        {"final_residual", r.final_residual},
                        {"fitted_rate", fit.rho_hat},
                        {"inner_iterations", r.inner_iters}});
      }
      std::cout << rows.dump(2) << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
