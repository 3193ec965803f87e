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

// Grid-based Bayesian temperature inference.

#pragma once

#include "qestlab/collisional.hpp"
#include "qestlab/parallel.hpp"
#include "qestlab/qfi.hpp"
#include "qestlab/rng.hpp"
#include "qestlab/stats.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace qestlab {

struct TemperatureGrid {
  double t_min = 0.05;
  double t_max = 5.0;
  int n_points = 500;
  std::vector<double> points;

  static TemperatureGrid uniform(double t_min, double t_max, int n) {
    if (!(t_min > 0.0) || !(t_max > t_min)) throw DomainError("TemperatureGrid: need 0 < t_min < t_max");
    if (n < 2) throw DomainError("TemperatureGrid: need n_points >= 2");
    TemperatureGrid g{t_min, t_max, n, std::vector<double>(n)};
    const double d = (t_max - t_min) / (n - 1);
    for (int k = 0; k < n; ++k) g.points[k] = t_min + k * d;
    g.points[n - 1] = t_max;
    return g;
  }

  double step() const { return (t_max - t_min) / (n_points - 1); }
  std::size_t size() const { return points.size(); }
};

/// (e^{a sin^2(pi x)} - 1) / (e^{a/2} I0(a/2) - 1) on x in [0, 1]; unit integral.
inline double lambda_alpha(double x, double alpha) {
  if (alpha == 0.0) throw DomainError("lambda_alpha: alpha = 0 has no normalization; use the flat prior");
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double s = std::sin(PI * x);
  const double norm = std::exp(alpha / 2.0) * std::cyl_bessel_i(0.0, std::abs(alpha) / 2.0) - 1.0;
  return std::expm1(alpha * s * s) / norm;
}

struct PriorSpec {
  enum class Family { LambdaAlpha, Flat, Custom };
  Family family = Family::LambdaAlpha;
  double alpha = -100.0;
  std::vector<double> table;  // Custom: unnormalized values on the grid points

  static PriorSpec lambda(double alpha) { return {Family::LambdaAlpha, alpha, {}}; }
  static PriorSpec flat() { return {Family::Flat, 0.0, {}}; }
  static PriorSpec custom(std::vector<double> t) { return {Family::Custom, 0.0, std::move(t)}; }
};

/// Continuous prior density on [t_min, t_max] (Custom has none).
inline double prior_density(const PriorSpec& spec, double t, double t_min, double t_max) {
  const double w = t_max - t_min;
  switch (spec.family) {
    case PriorSpec::Family::LambdaAlpha:
      return lambda_alpha((t - t_min) / w, spec.alpha) / w;
    case PriorSpec::Family::Flat:
      return (t >= t_min && t <= t_max) ? 1.0 / w : 0.0;
    default:
      throw DomainError("prior_density: custom tables have no continuous form");
  }
}

/// Prior densities P_k on the grid normalized so that sum_k P_k * dT = 1.
inline std::vector<double> prior_evaluate(const PriorSpec& spec, const TemperatureGrid& grid) {
  std::vector<double> w(grid.size());
  if (spec.family == PriorSpec::Family::Custom) {
    if (spec.table.size() != grid.size()) throw DomainError("prior_evaluate: custom table size mismatch");
    w = spec.table;
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k)
      w[k] = prior_density(spec, grid.points[k], grid.t_min, grid.t_max);
  }
  double s = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("prior_evaluate: invalid prior weight");
    s += v;
  }
  if (!(s > 0.0)) throw DomainError("prior_evaluate: prior vanishes on the grid");
  for (double& v : w) v /= s * grid.step();
  return w;
}

/// log P(x | T_k) for x in {0, 1}; -inf where the probability vanishes.
struct LikelihoodTable {
  std::array<std::vector<double>, 2> log_p;

  static LikelihoodTable build(const TemperatureGrid& grid, const std::function<double(double)>& p1) {
    LikelihoodTable t;
    t.log_p[0].resize(grid.size());
    t.log_p[1].resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double q = std::clamp(p1(grid.points[k]), 0.0, 1.0);
      t.log_p[1][k] = std::log(q);
      t.log_p[0][k] = std::log1p(-q);
    }
    return t;
  }

  static LikelihoodTable collisional(const TemperatureGrid& grid, const CollisionalParams& p) {
    return build(grid, [&p](double t) { return likelihood(1, t, p); });
  }
};

/// Likelihood of the first outcome plus conditionals on the previous outcome.
struct MarkovLikelihoodTable {
  LikelihoodTable first;
  std::array<LikelihoodTable, 2> given_prev;

  static MarkovLikelihoodTable collisional(const TemperatureGrid& grid, const CollisionalParams& p) {
    MarkovLikelihoodTable m;
    std::vector<Markov1Table> rows(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) rows[k] = markov1_table(grid.points[k], p);
    std::size_t idx = 0;
    auto lookup = [&](auto getter) {
      idx = 0;
      return LikelihoodTable::build(grid, [&](double) { return getter(rows[idx++]); });
    };
    m.first = lookup([](const Markov1Table& r) { return r.p1_marginal; });
    m.given_prev[0] = lookup([](const Markov1Table& r) { return r.p1_given[0]; });
    m.given_prev[1] = lookup([](const Markov1Table& r) { return r.p1_given[1]; });
    return m;
  }
};

struct PosteriorGrid {
  TemperatureGrid grid;
  std::vector<double> log_lik;    // L_k
  std::vector<double> prior;      // densities, sum * dT = 1
  std::vector<double> posterior;  // weights, sum = 1
  long long n_seen = 0;
  int last_outcome = -1;

  static PosteriorGrid start(const TemperatureGrid& grid, const PriorSpec& spec) {
    PosteriorGrid s{grid, std::vector<double>(grid.size(), 0.0), prior_evaluate(spec, grid), {}, 0, -1};
    s.normalize();
    return s;
  }

  /// posterior_k = e^{L_k - L_max} P_k / sum.
  void normalize() {
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < log_lik.size(); ++k)
      if (prior[k] > 0.0) lmax = std::max(lmax, log_lik[k]);
    if (!std::isfinite(lmax)) throw NumericalError("posterior: likelihood vanishes on the whole grid");
    posterior.assign(log_lik.size(), 0.0);
    double s = 0.0;
    for (std::size_t k = 0; k < log_lik.size(); ++k) {
      if (prior[k] <= 0.0 || log_lik[k] == -std::numeric_limits<double>::infinity()) continue;
      posterior[k] = std::exp(log_lik[k] - lmax) * prior[k];
      s += posterior[k];
    }
    for (double& v : posterior) v /= s;
  }
};

namespace detail {
inline void accumulate(PosteriorGrid& s, int x, const LikelihoodTable& lik) {
  if (x != 0 && x != 1) throw DomainError("posterior_update: outcome must be 0 or 1");
  const auto& row = lik.log_p[x];
  if (row.size() != s.log_lik.size()) throw DomainError("posterior_update: table/grid size mismatch");
  bool any = false;
  for (double v : row) any = any || std::isfinite(v);
  if (!any) throw DomainError("posterior_update: all-zero likelihood row");
  for (std::size_t k = 0; k < row.size(); ++k) s.log_lik[k] += row[k];
  ++s.n_seen;
  s.last_outcome = x;
}
}  // namespace detail

inline PosteriorGrid posterior_update(PosteriorGrid s, int x, const LikelihoodTable& lik) {
  detail::accumulate(s, x, lik);
  s.normalize();
  return s;
}

inline PosteriorGrid posterior_update(PosteriorGrid s, std::span<const int> bits, const LikelihoodTable& lik) {
  for (int x : bits) detail::accumulate(s, x, lik);
  s.normalize();
  return s;
}

/// Markov-1 mode: conditions on the previous outcome held in the state.
inline PosteriorGrid posterior_update(PosteriorGrid s, int x, const MarkovLikelihoodTable& lik) {
  detail::accumulate(s, x, s.last_outcome < 0 ? lik.first : lik.given_prev[s.last_outcome]);
  s.normalize();
  return s;
}

inline PosteriorGrid posterior_update(PosteriorGrid s, std::span<const int> bits,
                                      const MarkovLikelihoodTable& lik) {
  for (int x : bits) detail::accumulate(s, x, s.last_outcome < 0 ? lik.first : lik.given_prev[s.last_outcome]);
  s.normalize();
  return s;
}

struct PointEstimates {
  double ba = 0.0;
  double map = 0.0;
  double median = 0.0;
  double variance = 0.0;
};

inline PointEstimates point_estimates(const PosteriorGrid& s) {
  PointEstimates e;
  const auto& t = s.grid.points;
  double m2 = 0.0, best = -1.0, cdf = 0.0;
  bool med = false;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double w = s.posterior[k];
    e.ba += t[k] * w;
    m2 += t[k] * t[k] * w;
    if (w > best) {
      best = w;
      e.map = t[k];
    }
    cdf += w;
    if (!med && cdf >= 0.5) {
      e.median = t[k];
      med = true;
    }
  }
  if (!med) e.median = t.back();
  e.variance = std::max(0.0, m2 - e.ba * e.ba);
  return e;
}

/// Outcome generation and inference models for risk studies. When
/// `markov` is set the data come from the correlated ancilla process and
/// inference uses the Markov-1 likelihood.
struct RiskModel {
  CollisionalParams generation;
  CollisionalParams inference;
  bool markov = false;

  static RiskModel ideal(const CollisionalParams& p) { return {p, p, false}; }
};

struct RiskCurve {
  std::vector<long long> n;
  std::vector<double> mse;
  std::vector<double> mse_se;
};

namespace detail {

/// Sufficient statistics of a binary sequence for the i.i.d. and Markov-1
/// likelihoods: counts of ones/zeros, the first bit, and transition counts.
struct BitCounts {
  long long n1 = 0, n0 = 0;
  int first = -1, last = -1;
  long long trans[2][2] = {{0, 0}, {0, 0}};

  void push(int x) {
    (x ? n1 : n0)++;
    if (last >= 0) trans[last][x]++;
    else first = x;
    last = x;
  }
};

inline void add_scaled(std::vector<double>& l, const std::vector<double>& row, long long c) {
  if (c == 0) return;
  const auto cd = static_cast<double>(c);
  for (std::size_t k = 0; k < l.size(); ++k) l[k] += cd * row[k];
}

/// Exact hidden-Markov sampling of computational-basis outcomes: the
/// system state is conditioned on each measured ancilla.
class CorrelatedSource {
 public:
  CorrelatedSource(double t0, const CollisionalParams& p)
      : e_(thermal_channel_superop(t0, p)), u_(partial_swap_unitary(p.g_tau_sa)),
        probe_(probe_state(p).matrix()), rho_(steady_state(t0, p).matrix()) {}

  int next(Rng& rng) {
    const ComplexMatrix j = u_ * tensor_product(rho_, probe_) * u_.adjoint();
    const double p1 = std::clamp((j(1, 1) + j(3, 3)).real(), 0.0, 1.0);
    const int x = rng.bernoulli(p1);
    ComplexMatrix s(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s(a, b) = j(2 * a + x, 2 * b + x);
    s /= s.trace().real();
    rho_ = unvectorize(e_ * vectorize(s), 2, 2);
    return x;
  }

 private:
  ComplexMatrix e_, u_, probe_, rho_;
};

}  // namespace detail

/// Posterior from sufficient statistics; equals sequential updates up to
/// floating-point summation order.
inline PosteriorGrid posterior_from_counts(const PosteriorGrid& start, long long n1, long long n0,
                                           const LikelihoodTable& lik) {
  PosteriorGrid s = start;
  detail::add_scaled(s.log_lik, lik.log_p[1], n1);
  detail::add_scaled(s.log_lik, lik.log_p[0], n0);
  s.n_seen += n1 + n0;
  s.normalize();
  return s;
}

namespace detail {

inline double ba_from_counts(const PosteriorGrid& start, const BitCounts& c, const RiskModel& m,
                             const LikelihoodTable& iid, const MarkovLikelihoodTable& mk) {
  PosteriorGrid s = start;
  if (m.markov) {
    if (c.first >= 0) add_scaled(s.log_lik, mk.first.log_p[c.first], 1);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) add_scaled(s.log_lik, mk.given_prev[a].log_p[b], c.trans[a][b]);
  } else {
    add_scaled(s.log_lik, iid.log_p[1], c.n1);
    add_scaled(s.log_lik, iid.log_p[0], c.n0);
  }
  s.normalize();
  return point_estimates(s).ba;
}

/// Squared BA errors at each checkpoint for one trajectory at temperature t0.
inline std::vector<double> trial_errors(double t0, const std::vector<long long>& checkpoints,
                                        const RiskModel& m, const PosteriorGrid& start,
                                        const LikelihoodTable& iid, const MarkovLikelihoodTable& mk,
                                        Rng& rng) {
  std::vector<double> err(checkpoints.size());
  BitCounts c;
  const double p1 = m.markov ? 0.0 : likelihood(1, t0, m.generation);
  std::unique_ptr<CorrelatedSource> src;
  if (m.markov) src = std::make_unique<CorrelatedSource>(t0, m.generation);
  long long seen = 0;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    for (; seen < checkpoints[i]; ++seen) c.push(m.markov ? src->next(rng) : rng.bernoulli(p1));
    const double d = ba_from_counts(start, c, m, iid, mk) - t0;
    err[i] = d * d;
  }
  return err;
}

inline RiskCurve aggregate(const std::vector<long long>& checkpoints,
                           const std::vector<std::vector<double>>& per_trial) {
  RiskCurve r;
  r.n = checkpoints;
  const auto m = static_cast<double>(per_trial.size());
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    double s = 0.0, s2 = 0.0;
    for (const auto& e : per_trial) s += e[i];
    const double mean = s / m;
    for (const auto& e : per_trial) s2 += (e[i] - mean) * (e[i] - mean);
    r.mse.push_back(mean);
    r.mse_se.push_back(m > 1 ? std::sqrt(s2 / (m - 1.0) / m) : 0.0);
  }
  return r;
}

inline void check_checkpoints(const std::vector<long long>& cp) {
  for (std::size_t i = 0; i < cp.size(); ++i)
    if (cp[i] < 0 || (i > 0 && cp[i] < cp[i - 1])) throw DomainError("checkpoints must be sorted and >= 0");
}

}  // namespace detail

/// MSE of the Bayesian average at fixed T0 across `trials` trajectories;
/// trial t uses Rng::stream(seed, t).
inline RiskCurve mse_monte_carlo(double t0, const std::vector<long long>& checkpoints, long long trials,
                                 const RiskModel& model, const PriorSpec& prior,
                                 const TemperatureGrid& grid, std::uint64_t seed, int workers = 1) {
  if (trials < 1) throw DomainError("mse_monte_carlo: trials must be >= 1");
  detail::check_checkpoints(checkpoints);
  const PosteriorGrid start = PosteriorGrid::start(grid, prior);
  const LikelihoodTable iid = LikelihoodTable::collisional(grid, model.inference);
  const MarkovLikelihoodTable mk = model.markov ? MarkovLikelihoodTable::collisional(grid, model.inference)
                                                : MarkovLikelihoodTable{};
  auto per = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Rng rng = Rng::stream(seed, t);
    return detail::trial_errors(t0, checkpoints, model, start, iid, mk, rng);
  });
  return detail::aggregate(checkpoints, per);
}

/// Bayesian MSE: each trial draws T0 from the discretized prior on `grid`.
inline RiskCurve bmse_monte_carlo(const std::vector<long long>& checkpoints, long long trials,
                                  const RiskModel& model, const PriorSpec& prior,
                                  const TemperatureGrid& grid, std::uint64_t seed, int workers = 1) {
  if (trials < 1) throw DomainError("bmse_monte_carlo: trials must be >= 1");
  detail::check_checkpoints(checkpoints);
  const PosteriorGrid start = PosteriorGrid::start(grid, prior);
  const LikelihoodTable iid = LikelihoodTable::collisional(grid, model.inference);
  const MarkovLikelihoodTable mk = model.markov ? MarkovLikelihoodTable::collisional(grid, model.inference)
                                                : MarkovLikelihoodTable{};
  std::vector<double> cdf(grid.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) cdf[k] = (acc += start.prior[k]);
  auto per = parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Rng rng = Rng::stream(seed, t);
    const double u = rng.uniform() * acc;
    const auto k = std::min<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin(),
                                         grid.size() - 1);
    return detail::trial_errors(grid.points[k], checkpoints, model, start, iid, mk, rng);
  });
  return detail::aggregate(checkpoints, per);
}

/// Classical FI of the model likelihood on every grid point (h = dT/10).
inline std::vector<double> fisher_on_grid(const TemperatureGrid& grid, const CollisionalParams& p) {
  const double h = grid.step() / 10.0;
  std::vector<double> f(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) f[k] = likelihood_fi(grid.points[k], p, h);
  return f;
}

/// E_P[(d/dT ln P)^2] on the interior by central differences; points with
/// P < 1e-12 contribute zero.
inline double prior_fisher(const std::vector<double>& prior, const TemperatureGrid& grid) {
  const double d = grid.step();
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < prior.size(); ++k) {
    if (prior[k] < 1e-12) continue;
    const double dp = (prior[k + 1] - prior[k - 1]) / (2.0 * d);
    s += dp * dp / prior[k] * d;
  }
  return s;
}

struct Bounds {
  std::vector<double> crb;  // 1/(n F(T_k)), +inf where F = 0
  double vtsb = 0.0;
  double asymptotic_bmse = 0.0;
  double mean_fisher = 0.0;
  double prior_fisher = 0.0;
};

inline Bounds bounds_from_fisher(const std::vector<double>& prior, const std::vector<double>& f,
                                 const TemperatureGrid& grid, long long n) {
  if (n < 1) throw DomainError("bounds: n must be >= 1");
  const double d = grid.step(), inf = std::numeric_limits<double>::infinity();
  const auto nd = static_cast<double>(n);
  Bounds b;
  b.crb.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    b.crb[k] = f[k] > 0.0 ? 1.0 / (nd * f[k]) : inf;
    b.mean_fisher += prior[k] * f[k] * d;
    if (prior[k] > 0.0) b.asymptotic_bmse += prior[k] * b.crb[k] * d;
  }
  b.prior_fisher = prior_fisher(prior, grid);
  b.vtsb = 1.0 / (nd * b.mean_fisher + b.prior_fisher);
  return b;
}

inline Bounds bounds(const PriorSpec& prior, const CollisionalParams& model, const TemperatureGrid& grid,
                     long long n) {
  return bounds_from_fisher(prior_evaluate(prior, grid), fisher_on_grid(grid, model), grid, n);
}

/// E_P[1/F] for one coupling configuration.
inline double expected_inverse_fisher(const PriorSpec& prior, const CollisionalParams& model,
                                      const TemperatureGrid& grid) {
  return bounds(prior, model, grid, 1).asymptotic_bmse;
}

struct CouplingSweep {
  std::vector<double> gamma_tau_se;
  std::vector<double> g_tau_sa;
  std::vector<std::vector<double>> value;  // [g index][gamma index] = E_P[1/F]
  std::vector<double> best_gamma;          // argmin over gamma per g
  std::vector<double> best_value;
};

inline CouplingSweep coupling_sweep(const std::vector<double>& gammas, const std::vector<double>& gs,
                                    const PriorSpec& prior, const TemperatureGrid& grid,
                                    const CollisionalParams& base, int workers = 1) {
  if (gammas.empty() || gs.empty()) throw DomainError("coupling_sweep: empty grid");
  CouplingSweep out{gammas, gs, {}, {}, {}};
  const std::size_t ng = gammas.size();
  auto vals = parallel_map(ng * gs.size(), workers, [&](std::size_t i) {
    CollisionalParams p = base;
    p.g_tau_sa = gs[i / ng];
    p.gamma_tau_se = gammas[i % ng];
    p.validate();
    return expected_inverse_fisher(prior, p, grid);
  });
  for (std::size_t j = 0; j < gs.size(); ++j) {
    out.value.emplace_back(vals.begin() + j * ng, vals.begin() + (j + 1) * ng);
    const auto it = std::min_element(out.value.back().begin(), out.value.back().end());
    out.best_gamma.push_back(gammas[it - out.value.back().begin()]);
    out.best_value.push_back(*it);
  }
  return out;
}

/// Symmetric interval [T0 - delta, T0 + delta].
inline TemperatureGrid interval_grid(double t0, double delta, int n) {
  return TemperatureGrid::uniform(t0 - delta, t0 + delta, n);
}

}  // namespace qestlab
