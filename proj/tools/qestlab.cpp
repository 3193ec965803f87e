// Copyright 2026 The QEstLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qestlab <experiment> --config FILE [--seed N] [--workers K] [--out DIR]
// qestlab validate --config FILE

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>

#include "config.hpp"
#include "qestlab/bayes.hpp"
#include "qestlab/collisional.hpp"
#include "qestlab/holonomic.hpp"
#include "qestlab/parallel.hpp"
#include "qestlab/qfi.hpp"

#ifndef QESTLAB_VERSION
#define QESTLAB_VERSION "dev"
#endif

namespace qestlab::cli {
namespace {

using json = nlohmann::ordered_json;

struct RunOpts {
  std::uint64_t seed = 0;
  int workers = 1;
};

struct Output {
  Table table;
  json results;
};

using Runner = std::function<Output(const RunOpts&)>;

/// Derived quantities printed by `validate`.
using Report = std::vector<std::pair<std::string, std::string>>;

/// Re-raises library validation failures as config errors.
template <class F>
auto checked(Config& c, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw c.error_at(key, e.what());
  }
}

CollisionalParams parse_model(Config& c) {
  CollisionalParams p;
  p.omega = c.num("model.omega", 1.0);
  p.gamma_tau_se = c.num("model.gamma_tau_se", 0.4);
  p.g_tau_sa = c.num("model.g_tau_sa", PI / 2.0);
  const std::string probe = c.choice("model.probe", "ground", {"ground", "thermal", "mixture"});
  if (probe == "thermal") p.probe = ProbePrep::thermal(c.num("model.probe_temperature", 0.5));
  if (probe == "mixture") p.probe = ProbePrep::mixture(c.num("model.probe_q", 1.0));
  if (!(p.g_tau_sa > 0.0) || p.g_tau_sa > PI / 2.0 + 1e-12)
    throw c.error_at("model.g_tau_sa", "must lie in (0, pi/2]");
  checked(c, "model", [&] {
    p.validate();
    return 0;
  });
  return p;
}

TemperatureGrid parse_grid(Config& c, int default_points = 500) {
  const double lo = c.num("grid.t_min", 0.05), hi = c.num("grid.t_max", 5.0);
  const long long n = c.integer("grid.n_points", default_points);
  if (!(lo > 0.0)) throw c.error_at("grid.t_min", "must be > 0");
  if (!(hi > lo)) throw c.error_at("grid.t_max", "t_min must be < t_max");
  if (n < 2 || n > 1000000) throw c.error_at("grid.n_points", "must lie in [2, 1e6]");
  return TemperatureGrid::uniform(lo, hi, static_cast<int>(n));
}

PriorSpec parse_prior(Config& c) {
  const std::string fam = c.choice("prior.family", "lambda", {"lambda", "flat"});
  if (fam == "flat") return PriorSpec::flat();
  const double a = c.num("prior.alpha", -100.0);
  if (a == 0.0) throw c.error_at("prior.alpha", "alpha = 0 is the flat prior; use family = flat");
  return PriorSpec::lambda(a);
}

std::vector<long long> parse_counts(Config& c, const std::string& key, const std::vector<double>& def) {
  std::vector<long long> out;
  for (double v : c.list(key, def)) {
    if (v < 0.0 || v != std::floor(v)) throw c.error_at(key, "entries must be non-negative integers");
    out.push_back(static_cast<long long>(v));
  }
  if (!std::is_sorted(out.begin(), out.end())) throw c.error_at(key, "entries must be sorted");
  return out;
}

void report_thermal(Report& r, const CollisionalParams& p, double t) {
  r.emplace_back("nbar(T=" + Config::fmt(t) + ")", Config::fmt(mean_occupation(t, p.omega)));
  r.emplace_back("Gamma(T=" + Config::fmt(t) + ")", Config::fmt(relaxation(t, p)));
}

std::vector<double> sweep_values(double lo, double hi, long long n, bool log_scale) {
  std::vector<double> v;
  for (long long i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v.push_back(log_scale ? lo * std::pow(hi / lo, s) : lo + (hi - lo) * s);
  }
  return v;
}

// Experiments -------------------------------------------------------------

Runner posterior_demo(Config& c, Report& r) {
  const auto model = parse_model(c);
  const auto grid = parse_grid(c);
  const auto prior = parse_prior(c);
  const double t0 = c.num("run.t0", 1.5);
  const long long n = c.integer("run.n", 1000);
  if (!(t0 > 0.0)) throw c.error_at("run.t0", "must be > 0");
  if (n < 1) throw c.error_at("run.n", "must be >= 1");
  auto cps = parse_counts(c, "run.checkpoints", {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000});
  cps.erase(std::remove_if(cps.begin(), cps.end(), [n](long long v) { return v > n || v < 1; }), cps.end());
  if (cps.empty() || cps.back() != n) cps.push_back(n);
  report_thermal(r, model, t0);
  return [=](const RunOpts& o) {
    const auto rec = sample_trajectory(t0, n, model, o.seed);
    const auto lik = LikelihoodTable::collisional(grid, model);
    const auto start = PosteriorGrid::start(grid, prior);
    Table t({"n[outcomes]", "ones[outcomes]", "ba[Omega]", "map[Omega]", "median[Omega]", "posterior_sd[Omega]"});
    long long ones = 0, seen = 0;
    PointEstimates last;
    for (long long cp : cps) {
      for (; seen < cp; ++seen) ones += rec.bits[seen];
      last = point_estimates(posterior_from_counts(start, ones, cp - ones, lik));
      t.row({double(cp), double(ones), last.ba, last.map, last.median, std::sqrt(last.variance)});
    }
    json res{{"t0", t0}, {"n", n}, {"ones", ones}, {"final_ba", last.ba}, {"final_map", last.map},
             {"final_sd", std::sqrt(last.variance)}};
    return Output{t, res};
  };
}

Runner mse_sweep(Config& c, Report& r) {
  const auto model = parse_model(c);
  const auto grid = parse_grid(c);
  const auto prior = parse_prior(c);
  const bool bayesian = c.flag("run.bayesian", false);
  const bool markov = c.flag("run.markov", false);
  const auto t0s = bayesian ? std::vector<double>{} : c.list("run.t0", {1.0, 1.5, 2.0});
  const auto cps = parse_counts(c, "run.checkpoints", {10, 100, 1000});
  const long long trials = c.integer("run.trials", 1000);
  if (trials < 1) throw c.error_at("run.trials", "must be >= 1");
  for (double t : t0s) {
    if (t < grid.t_min || t > grid.t_max) throw c.error_at("run.t0", "temperatures must lie inside the grid");
    report_thermal(r, model, t);
  }
  return [=](const RunOpts& o) {
    RiskModel m = RiskModel::ideal(model);
    m.markov = markov;
    Table t({"t0[Omega]", "n[outcomes]", "mse[Omega^2]", "mse_se[Omega^2]", "bound[Omega^2]", "vtsb[Omega^2]",
             "mse_over_bound[1]"});
    json res = json::array();
    if (bayesian) {
      const auto curve = bmse_monte_carlo(cps, trials, m, prior, grid, o.seed, o.workers);
      const auto prior_w = prior_evaluate(prior, grid);
      const auto fish = fisher_on_grid(grid, model);
      for (std::size_t i = 0; i < cps.size(); ++i) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const auto b = cps[i] > 0 ? bounds_from_fisher(prior_w, fish, grid, cps[i]) : Bounds{{}, nan, nan, 0, 0};
        t.row({nan, double(cps[i]), curve.mse[i], curve.mse_se[i], b.asymptotic_bmse, b.vtsb,
               curve.mse[i] / b.asymptotic_bmse});
        res.push_back({{"n", cps[i]}, {"bmse", curve.mse[i]}, {"asymptotic", b.asymptotic_bmse}, {"vtsb", b.vtsb}});
      }
    } else {
      for (std::size_t j = 0; j < t0s.size(); ++j) {
        const auto curve = mse_monte_carlo(t0s[j], cps, trials, m, prior, grid, o.seed + j, o.workers);
        const double f = likelihood_fi(t0s[j], model);
        for (std::size_t i = 0; i < cps.size(); ++i) {
          const double crb = 1.0 / (double(cps[i]) * f);
          t.row({t0s[j], double(cps[i]), curve.mse[i], curve.mse_se[i], crb,
                 std::numeric_limits<double>::quiet_NaN(), curve.mse[i] / crb});
        }
        res.push_back({{"t0", t0s[j]}, {"final_mse", curve.mse.back()}, {"final_crb", 1.0 / (double(cps.back()) * f)}});
      }
    }
    return Output{t, json{{"curves", res}}};
  };
}

Runner coupling_sweep_exp(Config& c, Report& r) {
  const auto base = parse_model(c);
  const auto prior = parse_prior(c);
  const double gmin = c.num("sweep.gamma_min", 0.02), gmax = c.num("sweep.gamma_max", 5.0);
  const long long gcount = c.integer("sweep.gamma_count", 60);
  if (!(gmin > 0.0) || !(gmax > gmin)) throw c.error_at("sweep.gamma_max", "need 0 < gamma_min < gamma_max");
  if (gcount < 2) throw c.error_at("sweep.gamma_count", "must be >= 2");
  const auto gs = c.list("sweep.g_tau_sa", {0.25 * PI, 0.375 * PI, 0.5 * PI});
  for (double g : gs)
    if (!(g > 0.0) || g > PI / 2.0 + 1e-12) throw c.error_at("sweep.g_tau_sa", "entries must lie in (0, pi/2]");
  const double t0 = c.num("sweep.t0", 1.5);
  const auto deltas = c.list("sweep.delta", {0.25, 0.5, 1.0});
  const long long np = c.integer("sweep.n_points", 100);
  for (double d : deltas)
    if (!(d > 0.0) || !(t0 - d > 0.0)) throw c.error_at("sweep.delta", "need 0 < delta < t0");
  if (np < 3) throw c.error_at("sweep.n_points", "must be >= 3");
  const auto gammas = sweep_values(gmin, gmax, gcount, true);
  r.emplace_back("points", std::to_string(gammas.size() * gs.size() * deltas.size()));
  return [=](const RunOpts& o) {
    Table t({"delta[Omega]", "g_tau_sa[rad]", "gamma_tau_se[1]", "expected_inverse_fisher[Omega^2]"});
    json best = json::array();
    for (double d : deltas) {
      const auto s = coupling_sweep(gammas, gs, prior, interval_grid(t0, d, int(np)), base, o.workers);
      for (std::size_t j = 0; j < gs.size(); ++j) {
        for (std::size_t i = 0; i < gammas.size(); ++i) t.row({d, gs[j], gammas[i], s.value[j][i]});
        best.push_back({{"delta", d}, {"g_tau_sa", gs[j]}, {"best_gamma_tau_se", s.best_gamma[j]},
                        {"min_expected_inverse_fisher", s.best_value[j]}});
      }
    }
    return Output{t, json{{"t0", t0}, {"optima", best}}};
  };
}

Runner probe_noise(Config& c, Report& r) {
  const std::string study = c.choice("probe_noise.study", "fisher", {"fisher", "mismatch"});
  const auto model = parse_model(c);
  if (model.probe.kind != ProbePrep::Kind::Ground)
    throw c.error_at("model.probe", "probe-noise sets the probe itself; leave model.probe = ground");
  if (study == "fisher") {
    const auto tps = c.list("probe_noise.probe_temperatures", {0.1, 0.3, 0.5, 1.0});
    for (double tp : tps)
      if (!(tp > 0.0)) throw c.error_at("probe_noise.probe_temperatures", "entries must be > 0");
    const auto grid = parse_grid(c, 100);
    r.emplace_back("rows", std::to_string(tps.size() * grid.size()));
    return [=](const RunOpts&) {
      Table t({"probe_temperature[Omega]", "T[Omega]", "fi_ideal[Omega^-2]", "fi_probe[Omega^-2]"});
      double worst = 0.0;
      for (double tp : tps) {
        CollisionalParams noisy = model;
        noisy.probe = ProbePrep::thermal(tp);
        for (double tt : grid.points) {
          const double a = likelihood_fi(tt, model), b = likelihood_fi(tt, noisy);
          t.row({tp, tt, a, b});
          if (a > 0.0) worst = std::max(worst, b / a);
        }
      }
      return Output{t, json{{"study", "fisher"}, {"max_fi_ratio_probe_over_ideal", worst}}};
    };
  }
  const auto grid = parse_grid(c);
  const auto prior = parse_prior(c);
  const auto qs = c.list("probe_noise.q", {1.0, 0.95, 0.9});
  for (double q : qs)
    if (!(q >= 0.0 && q <= 1.0)) throw c.error_at("probe_noise.q", "entries must lie in [0, 1]");
  const double t0 = c.num("run.t0", 1.5);
  const auto cps = parse_counts(c, "run.checkpoints", {10, 100, 1000, 10000});
  const long long trials = c.integer("run.trials", 200);
  if (trials < 1) throw c.error_at("run.trials", "must be >= 1");
  report_thermal(r, model, t0);
  return [=](const RunOpts& o) {
    Table t({"q[1]", "n[outcomes]", "mse[Omega^2]", "mse_se[Omega^2]", "crb[Omega^2]"});
    json res = json::array();
    const double f = likelihood_fi(t0, model);
    for (std::size_t j = 0; j < qs.size(); ++j) {
      RiskModel m = RiskModel::ideal(model);
      m.generation.probe = ProbePrep::mixture(qs[j]);
      const auto curve = mse_monte_carlo(t0, cps, trials, m, prior, grid, o.seed + j, o.workers);
      for (std::size_t i = 0; i < cps.size(); ++i)
        t.row({qs[j], double(cps[i]), curve.mse[i], curve.mse_se[i], 1.0 / (double(cps[i]) * f)});
      res.push_back({{"q", qs[j]}, {"final_mse", curve.mse.back()}, {"final_crb", 1.0 / (double(cps.back()) * f)}});
    }
    return Output{t, json{{"study", "mismatch"}, {"t0", t0}, {"curves", res}}};
  };
}

Runner qfi_table(Config& c, Report& r) {
  const auto model = parse_model(c);
  const auto grid = parse_grid(c, 50);
  report_thermal(r, model, grid.t_min);
  report_thermal(r, model, grid.t_max);
  return [=](const RunOpts& o) {
    const bool closed = model.full_swap() && model.probe.kind == ProbePrep::Kind::Ground;
    const ComplexMatrix h = system_hamiltonian(model);
    auto rows = parallel_map(grid.size(), o.workers, [&](std::size_t k) {
      const double tt = grid.points[k];
      const double th = thermal_fi(h, tt), q = qfi(ancilla_family(model), tt);
      return std::vector<double>{tt, th, q, likelihood_fi(tt, model), q / th,
                                 closed ? qfi_ratio(tt, model) : std::numeric_limits<double>::quiet_NaN()};
    });
    Table t({"T[Omega]", "thermal_fi[Omega^-2]", "ancilla_qfi[Omega^-2]", "outcome_fi[Omega^-2]", "ratio[1]",
             "ratio_closed_form[1]"});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& row : rows) {
      t.row(row);
      lo = std::min(lo, row[4]);
      hi = std::max(hi, row[4]);
    }
    return Output{t, json{{"min_ratio", lo}, {"max_ratio", hi}}};
  };
}

Runner mutual_info(Config& c, Report& r) {
  const auto model = parse_model(c);
  const double temp = c.num("run.temperature", 2.0);
  const long long gaps = c.integer("run.max_gap", 8);
  if (!(temp > 0.0)) throw c.error_at("run.temperature", "must be > 0");
  if (gaps < 1 || gaps > 200) throw c.error_at("run.max_gap", "must lie in [1, 200]");
  report_thermal(r, model, temp);
  return [=](const RunOpts& o) {
    const auto vals = parallel_map(std::size_t(gaps), o.workers,
                                   [&](std::size_t i) { return mutual_information(int(i) + 1, temp, model); });
    Table t({"gap[ancillae]", "mutual_information[nats]", "log_mutual_information[1]"});
    for (std::size_t i = 0; i < vals.size(); ++i) t.row({double(i + 1), vals[i], std::log(vals[i])});
    return Output{t, json{{"temperature", temp}, {"nearest_neighbour", vals.front()}}};
  };
}

Runner gate_sweep(Config& c, Report& r) {
  const std::string preset = c.choice("gate.preset", "s", {"h", "x", "z", "s", "s_alt", "custom", "cz"});
  std::vector<LoopSpec> loops;
  double theta = 0.0, phi = 0.0;
  if (preset == "custom" || preset == "cz") {
    theta = c.num("gate.theta", 0.0);
    phi = c.num("gate.phi", 0.0);
    loops = {{theta, phi}};
  } else if (preset == "h") loops = gates::hadamard();
  else if (preset == "x") loops = gates::x();
  else if (preset == "z") loops = gates::z();
  else if (preset == "s") loops = gates::s();
  else loops = gates::s_alt();

  const bool rwa = c.flag("pulse.rwa", false);
  const double f = c.num("pulse.f_e0", 1.0);
  const double ratio0 = c.num("pulse.f_ratio", 1.0);
  const double gof = c.num("pulse.gamma_over_f", 1e-4);
  const double spacing = c.num("pulse.spacing", 10.0);  // units of 1/beta
  const double window = c.num("pulse.window", 20.0);    // half width, units of 1/beta
  const bool global = c.choice("pulse.origin", "center", {"center", "global"}) == "global";
  const bool h1 = preset == "cz" && c.flag("pulse.include_h1", false);
  if (!(f > 0.0)) throw c.error_at("pulse.f_e0", "must be > 0");
  if (!(ratio0 > 0.0)) throw c.error_at("pulse.f_ratio", "must be > 0");
  if (gof < 0.0) throw c.error_at("pulse.gamma_over_f", "must be >= 0");
  if (spacing < 0.0) throw c.error_at("pulse.spacing", "must be >= 0");
  if (!(window > 0.0)) throw c.error_at("pulse.window", "must be > 0");

  const std::string param = c.choice("sweep.parameter", "beta_over_f", {"beta_over_f", "f_ratio"});
  const bool by_beta = param == "beta_over_f";
  const double lo = c.num("sweep.min", by_beta ? 0.01 : 0.5), hi = c.num("sweep.max", by_beta ? 1.0 : 2.0);
  const long long count = c.integer("sweep.count", 21);
  const bool log_scale = c.choice("sweep.scale", by_beta ? "log" : "linear", {"log", "linear"}) == "log";
  const double beta0 = c.num("sweep.beta_over_f", 0.1);
  const long long n_states = c.integer("sweep.n_states", 100);
  const bool optimize = by_beta && c.flag("sweep.optimize", false);
  if (!(lo > 0.0) || !(hi >= lo)) throw c.error_at("sweep.max", "need 0 < min <= max");
  if (count < 1 || count > 10000) throw c.error_at("sweep.count", "must lie in [1, 1e4]");
  if (!(beta0 > 0.0)) throw c.error_at("sweep.beta_over_f", "must be > 0");
  if (n_states < 2) throw c.error_at("sweep.n_states", "must be >= 2");
  if (optimize && count < 3) throw c.error_at("sweep.count", "optimize needs at least 3 points");
  const auto values = sweep_values(lo, hi, count, log_scale);

  const double bmin = (by_beta ? lo : beta0) * f, bmax = (by_beta ? hi : beta0) * f;
  r.emplace_back("pulse_window", Config::fmt(2.0 * window) + "/beta");
  r.emplace_back("pulse_window(beta=" + Config::fmt(bmax) + ")", Config::fmt(2.0 * window / bmax));
  r.emplace_back("pulse_window(beta=" + Config::fmt(bmin) + ")", Config::fmt(2.0 * window / bmin));
  if (preset != "cz" && loops.size() > 1) r.emplace_back("spacing", Config::fmt(spacing) + "/beta");

  auto point = [=](double beta_over_f, double ratio) -> std::array<double, 3> {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (preset == "cz") {
      TwoQubitConfig t;
      t.theta = theta;
      t.phi = phi;
      t.beta = beta_over_f * f;
      t.f_e0 = f;
      t.f_e1 = f * ratio;
      t.gamma1 = t.gamma2 = gof * f;
      t.rwa = rwa;
      t.include_h1 = h1;
      t.window = window;
      return {cz_average_infidelity(t), nan, nan};
    }
    GateProgram p;
    p.loops = loops;
    p.beta = beta_over_f * f;
    p.spacing = spacing / p.beta;
    p.f_e0 = f;
    p.f_e1 = f * ratio;
    p.gamma = gof * f;
    p.rwa = rwa;
    p.origin = global ? PhaseOrigin::GlobalClock : PhaseOrigin::PulseCenter;
    p.window = window;
    const auto s = average_infidelity(p, int(n_states));
    return {s.mean, s.max, s.min};
  };

  return [=](const RunOpts& o) {
    const auto vals = parallel_map(values.size(), o.workers, [&](std::size_t i) {
      return by_beta ? point(values[i], ratio0) : point(beta0, values[i]);
    });
    Table t({"beta_over_f[1]", "f_ratio[1]", "gamma_over_f[1]", "mean_infidelity[1]", "max_infidelity[1]",
             "min_infidelity[1]"});
    std::size_t best = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      t.row({by_beta ? values[i] : beta0, by_beta ? ratio0 : values[i], gof, vals[i][0], vals[i][1], vals[i][2]});
      if (vals[i][0] < vals[best][0]) best = i;
    }
    json res{{"parameter", param}, {"argmin", values[best]}, {"min_mean_infidelity", vals[best][0]},
             {"argmin_on_boundary", best == 0 || best + 1 == values.size()}};
    if (preset != "cz") res["asymptotic_infidelity"] = asymptotic_infidelity(ideal_gate(loops));
    if (optimize) {
      const auto opt = minimize_on_grid(values, [&](double b) { return point(b, ratio0)[0]; }, o.workers);
      res["refined_beta_over_f"] = opt.beta_opt;
      res["refined_min_infidelity"] = opt.infidelity_min;
    }
    return Output{t, res};
  };
}

Runner fibonacci_dump(Config& c, Report& r) {
  const long long n = c.integer("run.n", 100);
  if (n < 2 || n > 10000000) throw c.error_at("run.n", "must lie in [2, 1e7]");
  r.emplace_back("points", std::to_string(n));
  return [=](const RunOpts&) {
    Table t({"k[1]", "x[1]", "y[1]", "z[1]", "theta[rad]", "phi[rad]"});
    const auto states = fibonacci_states(int(n));
    for (std::size_t k = 0; k < states.size(); ++k) {
      const ComplexMatrix m = states[k].projector();
      const double x = 2.0 * m(1, 0).real(), y = 2.0 * m(1, 0).imag(), z = (m(0, 0) - m(1, 1)).real();
      t.row({double(k + 1), x, y, z, std::acos(std::clamp(z, -1.0, 1.0)), std::atan2(y, x)});
    }
    return Output{t, json{{"n", n}}};
  };
}

using Factory = Runner (*)(Config&, Report&);

const std::map<std::string, Factory>& registry() {
  static const std::map<std::string, Factory> r{
      {"posterior-demo", posterior_demo}, {"mse-sweep", mse_sweep},     {"coupling-sweep", coupling_sweep_exp},
      {"probe-noise", probe_noise},       {"qfi-table", qfi_table},     {"mutual-info", mutual_info},
      {"gate-sweep", gate_sweep},         {"fibonacci-dump", fibonacci_dump}};
  return r;
}

struct Prepared {
  std::string experiment, name;
  Runner runner;
  Report report;
  RunOpts opts;
};

/// Parses the whole config for `experiment` ("" takes run.experiment) without running anything.
Prepared prepare(Config& c, std::string experiment, std::optional<std::uint64_t> seed_flag,
                 std::optional<int> workers_flag) {
  const std::string declared = c.str("run.experiment", experiment);
  if (experiment.empty()) experiment = declared;
  if (experiment.empty()) throw ConfigError("run.experiment is required for validate");
  if (declared != experiment)
    throw c.error_at("run.experiment", "config is for '" + declared + "', not '" + experiment + "'");
  const auto it = registry().find(experiment);
  if (it == registry().end()) throw c.error_at("run.experiment", "unknown experiment '" + experiment + "'");
  Prepared p;
  p.experiment = experiment;
  p.name = c.str("run.name", experiment);
  if (p.name.empty() || p.name.find_first_of("/\\") != std::string::npos)
    throw c.error_at("run.name", "must be a plain file stem");
  const long long seed = c.integer("run.seed", 12345);
  if (seed < 0) throw c.error_at("run.seed", "must be >= 0");
  p.opts.seed = seed_flag ? *seed_flag : static_cast<std::uint64_t>(seed);
  c.set_effective("run.seed", std::to_string(p.opts.seed));
  const bool has_workers = c.has("run.workers");
  const long long w = c.integer("run.workers", 0);
  p.opts.workers = workers_flag ? *workers_flag : (has_workers && w > 0 ? int(w) : default_workers());
  if (p.opts.workers < 1) throw ConfigError("workers must be >= 1");
  p.runner = it->second(c, p.report);
  c.reject_unknown();
  return p;
}

std::string canonical_without_workers(const Config& c) {
  std::string s;
  for (const auto& [k, v] : c.effective())
    if (k != "run.workers") s += k + "=" + v + "\n";
  return s;
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << bytes;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

int run_experiment(const std::string& experiment, const std::string& config_path, std::optional<std::uint64_t> seed,
                   std::optional<int> workers, const std::string& out_dir) {
  Prepared p;
  Config c;
  try {
    c = Config::load(config_path);
    p = prepare(c, experiment, seed, workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const Output out = p.runner(p.opts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string canon = canonical_without_workers(c);
    const std::string config_sha = sha256_hex(canon);

    json summary{{"experiment", p.experiment}, {"config_sha256", config_sha}, {"seed", p.opts.seed},
                 {"rows", out.table.size()}, {"results", out.results}};
    const std::string csv = out.table.text(), sum = summary.dump(2) + "\n";
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const std::string csv_name = p.name + ".csv", sum_name = p.name + ".summary.json";
    write_file(dir / csv_name, csv);
    write_file(dir / sum_name, sum);

    json cfg = json::object();
    for (const auto& [k, v] : c.effective())
      if (k != "run.workers") cfg[k] = v;
    json manifest{{"experiment", p.experiment},
                  {"version", QESTLAB_VERSION},
                  {"rng", Rng::kAlgorithm},
                  {"seed", p.opts.seed},
                  {"workers", p.opts.workers},
                  {"wall_time_s", wall},
                  {"config_sha256", config_sha},
                  {"config", cfg},
                  {"outputs", {{csv_name, sha256_hex(csv)}, {sum_name, sha256_hex(sum)}}}};
    write_file(dir / (p.name + ".manifest.json"), manifest.dump(2) + "\n");
    std::cout << (dir / csv_name).string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

int validate(const std::string& config_path) {
  try {
    Config c = Config::load(config_path);
    const Prepared p = prepare(c, "", std::nullopt, 1);
    std::cout << "config: " << config_path << "\n"
              << "experiment: " << p.experiment << "\n"
              << "status: ok\n";
    for (const auto& [k, v] : c.effective())
      if (k != "run.workers") std::cout << "  " << k << " = " << v << "\n";
    std::cout << "derived:\n";
    for (const auto& [k, v] : p.report) std::cout << "  " << k << " = " << v << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cout << "config: " << config_path << "\nstatus: invalid\n  " << e.what() << "\n";
    return 2;
  }
}

}  // namespace
}  // namespace qestlab::cli

int main(int argc, char** argv) {
  using namespace qestlab::cli;
  CLI::App app{"qestlab: thermometry and holonomic-gate experiments"};
  app.set_version_flag("--version", QESTLAB_VERSION);
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string chosen;

  for (const auto& [name, factory] : registry()) {
    (void)factory;
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--workers", workers, "worker threads (default: QESTLAB_WORKERS or cores)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory");
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
  val->callback([&chosen] { chosen = "validate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (chosen == "validate") return validate(config);
  return run_experiment(chosen, config, seed, workers, out_dir);
}
