// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include "dcmg/config_io.hpp"
#include "dcmg/equilibrium.hpp"
#include "dcmg/scenarios.hpp"
#include "dcmg/stability.hpp"
#include "dcmg/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace dcmg::cli {
namespace {

std::string num(double x) {
  if (std::isnan(x)) return "n/a";
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

void print_history(std::ostream& err, const SolverError& e) {
  err << "error: " << e.what() << '\n';
  if (!e.history().empty()) {
    err << "history:";
    for (double h : e.history()) err << ' ' << num(h);
    err << '\n';
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    print_history(err, e);
    return kExitNegative;
  } catch (const VoltageCollapse& e) {
    err << "error: " << e.what() << '\n';
    return kExitNegative;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNegative;
  }
}

}  // namespace

int cmd_certify(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load_config(config_path);
    const MicrogridConfig& c = doc.config;
    for (int i = 0; i < c.n(); ++i) {
      if (!c.dgus[i].load.is_zip()) {
        err << "certify: dgus[" << i << "] has exponent r = " << c.dgus[i].load.exponent
            << "; the existence certificate covers ZIP loads (r = 0) only.\n"
            << "Use `dcmg equilibrium --newton --config " << config_path << "` instead.\n";
        return kExitUsage;
      }
    }
    const ExistenceCertificate cert = certificate(c);
    out << "certificate\n";
    out << "  N             " << c.n() << '\n';
    out << "  Delta         " << num(cert.Delta) << '\n';
    out << "  Delta_vector  " << num(cert.Delta_vector) << '\n';
    out << "  delta_minus   " << num(cert.delta_minus) << '\n';
    out << "  delta_plus    " << num(cert.delta_plus) << '\n';
    out << "  feasible      " << yes_no(cert.feasible) << '\n';
    out << "dgu  V_star  H_lower  H_upper\n";
    for (int i = 0; i < c.n(); ++i) {
      out << i << "  " << num(cert.V_star[i]);
      if (cert.feasible) {
        out << "  " << num(cert.lower_bound()[i]) << "  " << num(cert.upper_bound()[i]);
      } else {
        out << "  -  -";
      }
      out << '\n';
    }
    return cert.feasible ? kExitOk : kExitNegative;
  });
}

int cmd_equilibrium(const std::string& config_path, bool newton, bool fixed_point,
                    std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load_config(config_path);
    const MicrogridConfig& c = doc.config;
    const SolverSettings& sv = doc.solver;
    Vector V;
    std::string method;
    int iterations = 0;
    if (fixed_point || (!newton && c.all_zip())) {
      if (!c.all_zip()) {
        err << "equilibrium: --fixed-point needs ZIP loads (r = 0); use --newton\n";
        return kExitUsage;
      }
      const ExistenceCertificate cert = certificate(c);
      if (cert.feasible || fixed_point) {
        const FixedPointResult fp =
            solve_zip_fixed_point(c, cert, sv.fixed_point_tol, sv.max_iter);
        V = fp.V;
        iterations = fp.iterations;
        method = "fixed-point";
      }
    }
    if (method.empty()) {
      const NewtonResult nr = solve_zie_newton(c, c.v_ref(), sv.newton_tol, sv.max_iter);
      V = nr.V;
      iterations = nr.iterations;
      method = "newton";
    }
    const GainSet gains = resolve_gains(c, sv.gain_margin);
    const EquilibriumSolution sol = reconstruct_full(c, gains, V);
    const Vector Is = c.ratings();
    const double sharing_dev =
        (sol.X.It.cwiseQuotient(Is).array() - sol.epsilon).abs().maxCoeff();
    const double balance = std::abs(Is.dot(V - c.v_ref()));
    const double scale = Is.sum() * std::max(1.0, c.v_ref().maxCoeff());

    out << "equilibrium\n";
    out << "  method        " << method << '\n';
    out << "  iterations    " << iterations << '\n';
    out << "  epsilon       " << num(sol.epsilon) << '\n';
    out << "  res_nodes     " << num(sol.residual_nodes) << '\n';
    out << "  res_balance   " << num(sol.residual_balance) << '\n';
    out << "  sharing       " << (sharing_dev <= 1e-9 ? "ok" : "violated")
        << " (max |I_t/I_s - epsilon| = " << num(sharing_dev) << ")\n";
    out << "  balance       " << (balance <= 1e-9 * scale ? "ok" : "violated")
        << " (|1^T I_s (V - V_ref)| = " << num(balance) << ")\n";
    if (c.all_zip()) {
      const ExistenceCertificate cert = certificate(c);
      if (cert.feasible) out << "  region        " << to_string(membership(V, cert)) << '\n';
    }
    out << "dgu  V  I_t  v  Omega\n";
    for (int i = 0; i < c.n(); ++i) {
      out << i << "  " << num(V[i]) << "  " << num(sol.X.It[i]) << "  " << num(sol.X.v[i])
          << "  " << num(sol.X.Omega[i]) << '\n';
    }
    out << "line  I\n";
    for (int l = 0; l < c.m(); ++l) out << l << "  " << num(sol.X.I[l]) << '\n';
    return kExitOk;
  });
}

int cmd_stability(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load_config(config_path);
    const MicrogridConfig& c = doc.config;
    const GainSet gains = resolve_gains(c, doc.solver.gain_margin);
    const Vector V = solve_voltage(c);
    const StabilityReport rep = assess_stability(c, gains, V);
    out << "stability\n";
    out << "dgu  k1  k2  k3  k4  gains_ok  load_ok  f_bar\n";
    for (int i = 0; i < c.n(); ++i) {
      const PrimaryGains& k = gains.k[i];
      out << i << "  " << num(k.k1) << "  " << num(k.k2) << "  " << num(k.k3) << "  "
          << num(k.k4) << "  " << yes_no(rep.gains_ok[i]) << "  " << yes_no(rep.load_ok[i])
          << "  " << num(rep.f_bar[i]) << '\n';
    }
    out << "  P blocks      " << to_string(rep.P_blocks) << '\n';
    out << "  P eigen       " << to_string(rep.P_eigen) << '\n';
    out << "  P min det     " << num(rep.P_min_block_det) << '\n';
    out << "  -Q blocks     " << to_string(rep.negQ_blocks) << '\n';
    out << "  -Q eigen      " << to_string(rep.negQ_eigen) << '\n';
    out << "  verdict       " << to_string(rep.verdict) << '\n';
    return rep.verdict == Verdict::not_certified ? kExitNegative : kExitOk;
  });
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&]() -> int {
    const ConfigDocument doc = load_config(opts.config);
    const MicrogridConfig& c = doc.config;
    ScenarioSettings sc = doc.scenario.value_or(ScenarioSettings{});
    if (opts.dt > 0.0) sc.dt = opts.dt;
    if (opts.t_end > 0.0) sc.t_end = opts.t_end;
    int stride = opts.stride > 0 ? opts.stride : sc.record_every;
    if (stride <= 0) stride = std::max(1, static_cast<int>(std::lround(1e-3 / sc.dt)));

    const GainSet gains = resolve_gains(c, doc.solver.gain_margin);
    IntegratorOptions io;
    io.dt = sc.dt;
    io.t_end = sc.t_end;
    io.record_every = stride;
    const SimulationTrace trace = integrate(c, gains, primary_start(c, gains), sc.events, io);

    {
      std::ofstream csv(opts.out);
      if (!csv) throw ConfigError(opts.out + ": cannot open for writing");
      write_trace_csv(csv, trace);
    }
    if (!opts.plot.empty()) {
      std::ofstream tsv(opts.plot);
      if (!tsv) throw ConfigError(opts.plot + ": cannot open for writing");
      write_plot_tsv(tsv, trace, {opts.plot_every, opts.per_unit});
    }

    // One phase per distinct event time.
    std::vector<double> cuts{0.0};
    for (const auto& ev : sc.events) {
      if (ev.time > cuts.back()) cuts.push_back(ev.time);
    }
    const double t_last = trace.time.back();
    bool phases_ok = true;
    out << "simulation\n";
    out << "  samples       " << trace.size() << '\n';
    out << "  dt            " << num(sc.dt) << '\n';
    out << "  t_end         " << num(t_last) << '\n';
    out << "phase  start  end  steady_time  rel_dispersion  balance  balance_tol  ok\n";
    for (std::size_t p = 0; p < cuts.size(); ++p) {
      if (cuts[p] > t_last) break;
      const double end = p + 1 < cuts.size() ? std::min(cuts[p + 1], t_last) : t_last;
      const PhaseReport rep =
          check_phase(trace, {"phase" + std::to_string(p), cuts[p], end}, ScenarioTolerances{});
      const bool interrupted = trace.termination == Termination::voltage_collapse && end >= t_last;
      phases_ok = phases_ok && rep.ok && !interrupted;
      out << p << "  " << num(cuts[p]) << "  " << num(end) << "  "
          << (rep.steady_time ? num(*rep.steady_time) : std::string("none")) << "  "
          << num(rep.relative_dispersion) << "  " << num(rep.balance) << "  "
          << num(rep.balance_tolerance) << "  " << yes_no(rep.ok && !interrupted) << '\n';
    }
    for (const auto& ev : trace.events) out << "event  " << num(ev.time) << "  " << ev.description << '\n';
    if (trace.collapse) {
      out << "voltage_collapse  dgu " << trace.collapse->node << "  t " << num(trace.collapse->time)
          << '\n';
    } else {
      out << "completed\n";
    }
    if (opts.expect_stable && (trace.collapse || !phases_ok)) return kExitNegative;
    return kExitOk;
  });
}

int cmd_template(const std::string& name, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
  return guarded(err, [&] {
    ConfigDocument doc;
    if (name == "two_node") {
      doc.config = two_node_config();
    } else if (name == "ring4") {
      doc.config = ring_config(4);
    } else if (name == "six_dgu") {
      doc.config = six_dgu_config();
      doc.scenario = ScenarioSettings{27.0, 1e-5, 100, reference_scenario_events(doc.config)};
    } else if (name == "six_dgu_connected") {
      doc.config = six_dgu_connected_zip_config();
    } else if (name == "collapse") {
      doc.config = collapse_config();
      doc.scenario = ScenarioSettings{2.0, 1e-5, 100, {}};
    } else if (name == "collapse_scaled") {
      doc.config = scale_line_resistances(collapse_config(), kCollapseResistanceScale);
      const double dt = stable_step(doc.config, 1e-5);
      doc.scenario = ScenarioSettings{1.0, dt, static_cast<int>(std::lround(1e-3 / dt)), {}};
    } else {
      err << "template: unknown name '" << name
          << "' (two_node, ring4, six_dgu, six_dgu_connected, collapse, collapse_scaled)\n";
      return kExitUsage;
    }
    if (out_path.empty()) {
      out << serialize_config(doc);
    } else {
      save_config(doc, out_path);
    }
    return kExitOk;
  });
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Islanded DC microgrid analysis and simulation", "dcmg"};
  app.require_subcommand(1);

  std::string config;
  auto* certify = app.add_subcommand("certify", "Existence certificate for ZIP loads");
  certify->add_option("--config", config, "Config JSON")->required();

  bool newton = false;
  bool fixed_point = false;
  auto* equil = app.add_subcommand("equilibrium", "Steady state under sharing and balancing");
  equil->add_option("--config", config, "Config JSON")->required();
  auto* f_newton = equil->add_flag("--newton", newton, "Damped Newton on the power-flow residual");
  auto* f_fp = equil->add_flag("--fixed-point", fixed_point, "Contraction iteration (ZIP only)");
  f_newton->excludes(f_fp);

  auto* stab = app.add_subcommand("stability", "Lyapunov certification at the equilibrium");
  stab->add_option("--config", config, "Config JSON")->required();

  SimulateOptions sim;
  auto* simc = app.add_subcommand("simulate", "Time-domain run with the config's scenario");
  simc->add_option("--config", sim.config, "Config JSON")->required();
  simc->add_option("--out", sim.out, "CSV trace output")->required();
  simc->add_option("--dt", sim.dt, "Step size in seconds")->check(CLI::PositiveNumber);
  simc->add_option("--t-end", sim.t_end, "Horizon in seconds")->check(CLI::PositiveNumber);
  simc->add_option("--stride", sim.stride, "Record every k-th step")->check(CLI::PositiveNumber);
  simc->add_option("--plot", sim.plot, "Plot data output (TSV)");
  simc->add_option("--plot-every", sim.plot_every, "Keep every k-th recorded sample in the plot")
      ->check(CLI::PositiveNumber);
  simc->add_flag("--per-unit", sim.per_unit, "Filter currents in per unit in the plot data");
  simc->add_flag("--expect-stable", sim.expect_stable,
                 "Exit 1 on voltage collapse or unmet phase objectives");

  std::string tname;
  std::string tout;
  auto* tmpl = app.add_subcommand("template", "Write a built-in config");
  tmpl->add_option("name", tname,
                   "two_node, ring4, six_dgu, six_dgu_connected, collapse, collapse_scaled")
      ->required();
  tmpl->add_option("--out", tout, "Output path (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (certify->parsed()) return cmd_certify(config, out, err);
  if (equil->parsed()) return cmd_equilibrium(config, newton, fixed_point, out, err);
  if (stab->parsed()) return cmd_stability(config, out, err);
  if (simc->parsed()) return cmd_simulate(sim, out, err);
  if (tmpl->parsed()) return cmd_template(tname, tout, out, err);
  return kExitUsage;
}

}  // namespace dcmg::cli
