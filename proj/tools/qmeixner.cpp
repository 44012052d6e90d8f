// Command-line surface of the q-Meixner toolkit: materialize measures and
// moments, evaluate generators, run the verification suites, study the
// second-difference convergence, and simulate paths.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmeixner/qmeixner.hpp"

namespace {

using namespace qmeixner;

struct CommonOpts {
  double q = 0.5;
  double theta = 0.3;
  double tau = 0.2;
  int n = 64;
  std::string format = "csv";
  std::string output = "-";
};

void add_common(CLI::App* cmd, CommonOpts& c, int default_n) {
  c.n = default_n;
  cmd->add_option("--q", c.q, "deformation parameter, in (-1, 1)")->capture_default_str();
  cmd->add_option("--theta", c.theta, "drift-like parameter")->capture_default_str();
  cmd->add_option("--tau", c.tau, "dispersion-like parameter, >= 0")->capture_default_str();
  cmd->add_option("--n", c.n, "quadrature rule size")->capture_default_str();
  cmd->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--output", c.output,
                  "output path ('-' = stdout; relative paths resolve under "
                  "QMEIXNER_OUTPUT_DIR when set)")
      ->capture_default_str();
}

void write_output(const std::string& target, const std::string& content) {
  if (target == "-") {
    std::cout << content;
    return;
  }
  std::filesystem::path path(target);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("QMEIXNER_OUTPUT_DIR")) {
      path = std::filesystem::path(dir) / path;
    }
  }
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path.string());
  out << content;
}

std::string scalar_output(double value, const std::string& format) {
  if (format == "json") return "{\"value\":" + json_number(value) + "}\n";
  return "value\n" + fmt17(value) + "\n";
}

std::string convergence_to_csv(const ConvergenceStudy& st) {
  std::string out = "h,order,abs_error\n";
  for (std::size_t i = 0; i < st.hs.size(); ++i) {
    for (std::size_t k = 0; k < st.errors[i].size(); ++k) {
      out += fmt17(st.hs[i]) + "," + std::to_string(k) + "," + fmt17(st.errors[i][k]) + "\n";
    }
  }
  for (std::size_t k = 0; k < st.slopes.size(); ++k) {
    out += "# slope order " + std::to_string(k) + " = " + fmt17(st.slopes[k]) + "\n";
  }
  return out;
}

std::string convergence_to_json(const ConvergenceStudy& st) {
  std::string out = "{\"side\":\"";
  out += st.side == Side::Left ? "left" : "right";
  out += "\",\"hs\":" + json_array(st.hs);
  out += ",\"reference_moments\":" + json_array(st.reference_moments);
  out += ",\"errors\":[";
  for (std::size_t i = 0; i < st.errors.size(); ++i) {
    if (i) out += ",";
    out += json_array(st.errors[i]);
  }
  out += "],\"slopes\":" + json_array(st.slopes) + "}\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Meixner Markov process toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  // measure -------------------------------------------------------------
  auto* measure = app.add_subcommand("measure", "materialize a discrete measure");
  auto measure_c = std::make_shared<CommonOpts>();
  auto measure_kind = std::make_shared<std::string>();
  auto measure_x = std::make_shared<double>(0.0);
  auto measure_s = std::make_shared<double>(0.0);
  auto measure_t = std::make_shared<double>(1.0);
  add_common(measure, *measure_c, 64);
  measure->add_option("--kind", *measure_kind, "transition kernel or representing measure")
      ->required()
      ->check(CLI::IsMember({"transition", "nu"}));
  measure->add_option("--x", *measure_x, "conditioning state")->capture_default_str();
  measure->add_option("--s", *measure_s, "start time (transition only)")->capture_default_str();
  measure->add_option("--t", *measure_t, "end time")->capture_default_str();
  measure->callback([=]() {
    const ProcessParams params(measure_c->q, measure_c->theta, measure_c->tau);
    const DiscreteMeasure m =
        *measure_kind == "transition"
            ? transition_measure(params, *measure_x, *measure_s, *measure_t, measure_c->n)
            : nu_measure(params, *measure_x, *measure_t, measure_c->n);
    write_output(measure_c->output,
                 measure_c->format == "json" ? measure_to_json(m) : measure_to_csv(m));
  });

  // moments -------------------------------------------------------------
  auto* mom_cmd = app.add_subcommand("moments", "raw moments of a discrete measure");
  auto mom_c = std::make_shared<CommonOpts>();
  auto mom_kind = std::make_shared<std::string>();
  auto mom_x = std::make_shared<double>(0.0);
  auto mom_s = std::make_shared<double>(0.0);
  auto mom_t = std::make_shared<double>(1.0);
  auto mom_kmax = std::make_shared<int>(8);
  add_common(mom_cmd, *mom_c, 64);
  mom_cmd->add_option("--kind", *mom_kind)->required()->check(CLI::IsMember({"transition", "nu"}));
  mom_cmd->add_option("--x", *mom_x)->capture_default_str();
  mom_cmd->add_option("--s", *mom_s)->capture_default_str();
  mom_cmd->add_option("--t", *mom_t)->capture_default_str();
  mom_cmd->add_option("--kmax", *mom_kmax, "highest moment order")->capture_default_str();
  mom_cmd->callback([=]() {
    const ProcessParams params(mom_c->q, mom_c->theta, mom_c->tau);
    const DiscreteMeasure m =
        *mom_kind == "transition"
            ? transition_measure(params, *mom_x, *mom_s, *mom_t, mom_c->n)
            : nu_measure(params, *mom_x, *mom_t, mom_c->n);
    const std::vector<double> mom = moments(m, *mom_kmax);
    write_output(mom_c->output,
                 mom_c->format == "json" ? moments_to_json(mom) : moments_to_csv(mom));
  });

  // generator -----------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generator", "evaluate the generator at (x, t)");
  auto gen_c = std::make_shared<CommonOpts>();
  auto gen_x = std::make_shared<double>(0.0);
  auto gen_t = std::make_shared<double>(1.0);
  auto gen_coeffs = std::make_shared<std::vector<double>>();
  auto gen_builtin = std::make_shared<std::string>();
  add_common(gen_cmd, *gen_c, 64);
  gen_cmd->add_option("--x", *gen_x)->capture_default_str();
  gen_cmd->add_option("--t", *gen_t)->capture_default_str();
  auto* opt_poly =
      gen_cmd->add_option("--poly", *gen_coeffs, "monomial coefficients c0,c1,...")
          ->delimiter(',');
  auto* opt_builtin = gen_cmd->add_option("--builtin", *gen_builtin, "built-in smooth function")
                          ->check(CLI::IsMember({"cauchy"}));
  opt_poly->excludes(opt_builtin);
  opt_builtin->excludes(opt_poly);
  gen_cmd->callback([=]() {
    const ProcessParams params(gen_c->q, gen_c->theta, gen_c->tau);
    double value;
    if (!gen_coeffs->empty()) {
      value = generator_poly(Poly(*gen_coeffs), params, *gen_x, *gen_t, gen_c->n);
    } else if (!gen_builtin->empty()) {
      value = generator_smooth(make_cauchy(), params, *gen_x, *gen_t, gen_c->n);
    } else {
      throw std::invalid_argument("generator needs --poly or --builtin");
    }
    write_output(gen_c->output, scalar_output(value, gen_c->format));
  });

  // verify ----------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "run the identity verification suites");
  auto verify_n = std::make_shared<int>(32);
  auto verify_only = std::make_shared<std::vector<std::string>>();
  auto verify_out = std::make_shared<std::string>("-");
  auto ov_q = std::make_shared<double>();
  auto ov_theta = std::make_shared<double>();
  auto ov_tau = std::make_shared<double>();
  auto ov_x = std::make_shared<double>();
  verify_cmd->add_option("--n", *verify_n, "quadrature rule size")->capture_default_str();
  verify_cmd->add_option("--only", *verify_only, "run only the named checks")->delimiter(',');
  verify_cmd->add_option("--output", *verify_out, "report path ('-' = stdout)")
      ->capture_default_str();
  auto* ov_q_opt = verify_cmd->add_option("--q", *ov_q, "collapse the q axis to one value");
  auto* ov_theta_opt = verify_cmd->add_option("--theta", *ov_theta, "collapse the theta axis");
  auto* ov_tau_opt = verify_cmd->add_option("--tau", *ov_tau, "collapse the tau axis");
  auto* ov_x_opt = verify_cmd->add_option("--x", *ov_x, "collapse the x axis");
  verify_cmd->callback([=, &exit_code]() {
    VerifyOptions opts;
    opts.N = *verify_n;
    opts.only = *verify_only;
    if (ov_q_opt->count()) opts.q = *ov_q;
    if (ov_theta_opt->count()) opts.theta = *ov_theta;
    if (ov_tau_opt->count()) opts.tau = *ov_tau;
    if (ov_x_opt->count()) opts.x = *ov_x;
    const std::vector<CheckReport> reports = run_verify(opts);
    for (const auto& r : reports) {
      std::cerr << (r.pass ? "pass" : "FAIL") << "  " << r.check
                << "  max_residual=" << fmt17(r.max_residual) << "  tolerance=" << r.tolerance
                << "\n";
    }
    write_output(*verify_out, reports_to_json(reports));
    if (!all_pass(reports)) exit_code = 1;
  });

  // converge --------------------------------------------------------------
  auto* conv_cmd = app.add_subcommand(
      "converge", "moment convergence of the rescaled second-difference measures");
  auto conv_c = std::make_shared<CommonOpts>();
  auto conv_x = std::make_shared<double>(0.4);
  auto conv_t = std::make_shared<double>(1.0);
  auto conv_kmax = std::make_shared<int>(6);
  auto conv_hs = std::make_shared<std::vector<double>>(std::vector<double>{1e-1, 1e-2, 1e-3});
  auto conv_side = std::make_shared<std::string>("left");
  add_common(conv_cmd, *conv_c, 64);
  conv_cmd->add_option("--x", *conv_x)->capture_default_str();
  conv_cmd->add_option("--t", *conv_t, "target time")->capture_default_str();
  conv_cmd->add_option("--kmax", *conv_kmax, "highest moment order")->capture_default_str();
  conv_cmd->add_option("--h-sweep", *conv_hs, "time gaps, comma separated")->delimiter(',');
  conv_cmd->add_option("--side", *conv_side, "which endpoint moves")
      ->check(CLI::IsMember({"left", "right"}))
      ->capture_default_str();
  conv_cmd->callback([=]() {
    const ProcessParams params(conv_c->q, conv_c->theta, conv_c->tau);
    const ConvergenceStudy st =
        convergence_study(params, *conv_x, *conv_t, *conv_kmax, *conv_hs, conv_c->n,
                          *conv_side == "left" ? Side::Left : Side::Right);
    write_output(conv_c->output, conv_c->format == "json" ? convergence_to_json(st)
                                                          : convergence_to_csv(st));
  });

  // simulate ----------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "sample process paths on a time grid");
  auto sim_c = std::make_shared<CommonOpts>();
  auto sim_x0 = std::make_shared<double>(0.0);
  auto sim_t0 = std::make_shared<double>(0.0);
  auto sim_t1 = std::make_shared<double>(1.0);
  auto sim_steps = std::make_shared<int>(4);
  auto sim_times = std::make_shared<std::vector<double>>();
  auto sim_paths = std::make_shared<int>(10000);
  auto sim_seed = std::make_shared<std::uint64_t>(42);
  add_common(sim_cmd, *sim_c, 32);
  sim_cmd->add_option("--x0", *sim_x0, "initial state")->capture_default_str();
  sim_cmd->add_option("--t0", *sim_t0, "grid start")->capture_default_str();
  sim_cmd->add_option("--t1", *sim_t1, "grid end")->capture_default_str();
  sim_cmd->add_option("--steps", *sim_steps, "number of equal steps")->capture_default_str();
  sim_cmd->add_option("--times", *sim_times, "explicit time grid (overrides t0/t1/steps)")
      ->delimiter(',');
  sim_cmd->add_option("--paths", *sim_paths, "number of paths")->capture_default_str();
  sim_cmd->add_option("--seed", *sim_seed, "RNG seed")->capture_default_str();
  sim_cmd->callback([=]() {
    const ProcessParams params(sim_c->q, sim_c->theta, sim_c->tau);
    std::vector<double> times = *sim_times;
    if (times.empty()) {
      if (*sim_steps < 1) throw std::invalid_argument("--steps must be >= 1");
      if (!(*sim_t1 > *sim_t0)) throw std::invalid_argument("--t1 must exceed --t0");
      for (int i = 0; i <= *sim_steps; ++i) {
        times.push_back(*sim_t0 + (*sim_t1 - *sim_t0) * static_cast<double>(i) /
                                      static_cast<double>(*sim_steps));
      }
    }
    const PathSample ps =
        simulate_paths(params, *sim_x0, times, *sim_paths, sim_c->n, *sim_seed);
    write_output(sim_c->output,
                 sim_c->format == "json" ? paths_to_json(ps) : paths_to_csv(ps));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const NonPositiveRecurrence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const NoConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}
