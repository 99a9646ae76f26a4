#include "pulseflow/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pulseflow/error.hpp"
#include "pulseflow/numerics.hpp"
#include "pulseflow/parallel.hpp"

namespace pulseflow {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

struct InfeasibleProbe {
  double alpha;
};

// Samples the integrator cannot resolve count as infeasible.
std::optional<double> qbar_or_infeasible(const BlockPair& pair, double alpha, const InverseConfig& config) {
  try {
    auto ev = evaluate_pair(pair, alpha, config);
    if (!ev.feasible) return std::nullopt;
    return ev.qbar;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::step_size_underflow) throw;
    return std::nullopt;
  }
}

struct Crossing {
  double lo, hi;
  double v_lo, v_hi;
};

// Adjacent feasible samples that straddle `target`.
std::vector<Crossing> crossings(const std::vector<AlphaSample>& sorted, double target) {
  std::vector<Crossing> out;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const auto& a = sorted[i];
    const auto& b = sorted[i + 1];
    if (!a.qbar || !b.qbar) continue;
    if ((*a.qbar - target) * (*b.qbar - target) <= 0.0) out.push_back({a.alpha, b.alpha, *a.qbar, *b.qbar});
  }
  return out;
}

struct BisectionResult {
  double alpha;
  double qbar;
  std::vector<std::string> warnings;
};

BisectionResult bisect_qbar(const BlockPair& pair, const InverseConfig& config, Crossing c,
                            double target) {
  BisectionResult r;
  auto better = [&](double a, double v) {
    if (std::abs(v - target) < std::abs(r.qbar - target)) {
      r.alpha = a;
      r.qbar = v;
    }
  };
  r.alpha = c.lo;
  r.qbar = c.v_lo;
  better(c.hi, c.v_hi);
  for (int it = 0; it < config.max_bisections; ++it) {
    const bool alpha_ok = c.hi - c.lo <= config.alpha_rel_tol * std::abs(0.5 * (c.lo + c.hi));
    const bool qbar_ok = std::abs(r.qbar - target) <= config.qbar_rel_tol * std::abs(target);
    if (alpha_ok && qbar_ok) break;
    const double mid = 0.5 * (c.lo + c.hi);
    if (mid <= c.lo || mid >= c.hi) break;
    const auto v = qbar_or_infeasible(pair, mid, config);
    if (!v) {
      r.warnings.push_back("InfeasibleProbe: alpha=" + fmt(mid) + " during bound bisection");
      c.hi = mid;
      continue;
    }
    better(mid, *v);
    if ((*v - target) * (c.v_lo - target) > 0.0) {
      c.lo = mid;
      c.v_lo = *v;
    } else {
      c.hi = mid;
      c.v_hi = *v;
    }
  }
  if (std::abs(r.qbar - target) > config.qbar_rel_tol * std::abs(target)) {
    r.warnings.push_back("BoundTolerance: qbar=" + fmt(r.qbar) + " vs target " + fmt(target));
  }
  return r;
}

// Bounded Brent minimisation (golden section with parabolic steps).
template <class F>
double brent_minimize(F&& f, double a, double b, double rel_tol, int max_iter) {
  constexpr double golden = 0.3819660112501051;
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = sqrt_eps * std::abs(x) + rel_tol * std::abs(x) / 3.0;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden_step = false;
      }
    }
    if (golden_step) {
      e = x >= xm ? a - x : b - x;
      d = golden * e;
    }
    const double u = x + (std::abs(d) >= tol1 ? d : std::copysign(tol1, d));
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) {
        a = x;
      } else {
        b = x;
      }
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x) {
        a = u;
      } else {
        b = u;
      }
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return x;
}

}  // namespace

BlockPair BlockPair::downstream(const AreaField& field, double block_length,
                                std::optional<double> x_end) {
  const double end = x_end.value_or(field.x_max());
  BlockPair p{{&field, end - 2.0 * block_length, block_length}, {&field, end - block_length, block_length}};
  p.validate();
  return p;
}

void BlockPair::validate() const {
  first.validate();
  second.validate();
  if (first.field != second.field) throw Error(ErrorCode::invalid_argument, "blocks must share one field");
  const double tol = 1e-12 * std::max(1.0, std::abs(second.x_start));
  if (std::abs(first.x_end() - second.x_start) > tol) {
    throw Error(ErrorCode::invalid_argument, "blocks must be adjacent");
  }
  if (std::abs(first.length - second.length) > tol) {
    throw Error(ErrorCode::invalid_argument, "blocks must have equal length");
  }
}

void InverseConfig::validate() const {
  if (!(qbar_min > 0.0) || !(qbar_max > qbar_min)) {
    throw Error(ErrorCode::invalid_argument,
                "need 0 < qbar_min < qbar_max (got " + fmt(qbar_min) + ", " + fmt(qbar_max) + ")");
  }
  if (!(alpha_initial > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha_initial must be positive");
  if (!(expansion_factor > 1.0)) throw Error(ErrorCode::invalid_argument, "expansion_factor must exceed 1");
  if (!(alpha_rel_tol > 0.0) || !(qbar_rel_tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tolerances must be positive");
  }
  if (grid_intervals < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least 2 intervals");
  integrator.validate();
}

PeriodicOptions InverseConfig::periodic_options() const {
  PeriodicOptions o;
  o.integrator = integrator;
  o.grid_intervals = grid_intervals;
  return o;
}

PairEvaluation evaluate_pair(const BlockPair& pair, double alpha, const InverseConfig& config) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be positive");
  const auto opts = config.periodic_options();
  const auto co1 = assemble_coefficients(pair.first, config.convention);
  const auto co2 = assemble_coefficients(pair.second, config.convention);
  PairEvaluation ev;
  ev.alpha = alpha;
  auto set1 = solve_periodic(co1, alpha, opts);
  auto set2 = solve_periodic(co2, alpha, opts);
  ev.delta_first = set1.discriminant;
  ev.delta_second = set2.discriminant;
  for (auto& l : set1.log) ev.log.push_back("block1: " + l);
  for (auto& l : set2.log) ev.log.push_back("block2: " + l);
  try {
    auto s1 = select_admissible(set1.solutions);
    auto s2 = select_admissible(set2.solutions);
    ev.ambiguous = s1.ambiguous || s2.ambiguous;
    if (s1.ambiguous) ev.log.push_back("block1: Ambiguous");
    if (s2.ambiguous) ev.log.push_back("block2: Ambiguous");
    ev.first = std::move(s1.solution);
    ev.second = std::move(s2.solution);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::none_admissible) throw;
    ev.feasible = false;
    ev.infeasible_reason = (ev.first ? "block2: " : "block1: ") + std::string(e.what());
    return ev;
  }
  ev.feasible = true;
  ev.t = ev.first->t;
  const auto& b1 = pair.first;
  ev.exit_flow.resize(ev.t.size());
  ev.entry_flow = ev.second->q;
  std::vector<double> mismatch(ev.t.size());
  for (std::size_t k = 0; k < ev.t.size(); ++k) {
    ev.exit_flow[k] = ev.first->q[k] + b1.field->wall_flux(ev.t[k], b1.x_start, b1.x_end());
    const double d = ev.entry_flow[k] - ev.exit_flow[k];
    mismatch[k] = d * d;
  }
  const double period = ev.t.back() - ev.t.front();
  ev.consistency = trapezoid(ev.t, mismatch);
  ev.qbar = (trapezoid(ev.t, ev.entry_flow) + trapezoid(ev.t, ev.exit_flow)) / (2.0 * period);
  return ev;
}

std::optional<double> consistency(const BlockPair& pair, double alpha, const InverseConfig& config) {
  auto ev = evaluate_pair(pair, alpha, config);
  if (!ev.feasible) return std::nullopt;
  return ev.consistency;
}

double qbar(const BlockPair& pair, double alpha, const InverseConfig& config) {
  auto ev = evaluate_pair(pair, alpha, config);
  if (!ev.feasible) throw Error(ErrorCode::infeasible, "alpha=" + fmt(alpha) + ": " + ev.infeasible_reason);
  return ev.qbar;
}

AlphaBounds solve_alpha_bounds(const BlockPair& pair, const InverseConfig& config) {
  config.validate();
  pair.validate();
  AlphaBounds out;
  auto& samples = out.samples;
  auto evaluate = [&](const std::vector<double>& alphas) {
    std::vector<AlphaSample> batch(alphas.size());
    parallel_for(alphas.size(), [&](std::size_t i) {
      batch[i] = {alphas[i], qbar_or_infeasible(pair, alphas[i], config)};
    });
    samples.insert(samples.end(), batch.begin(), batch.end());
  };
  auto covered = [&] {
    bool below = false, above = false;
    for (const auto& s : samples) {
      if (!s.qbar) continue;
      below = below || *s.qbar <= config.qbar_min;
      above = above || *s.qbar >= config.qbar_max;
    }
    return below && above;
  };
  evaluate({config.alpha_initial});
  // Rounds of two expansions in each direction; the sample set depends only
  // on the data, never on the worker count.
  for (int k = 1; k <= config.max_expansions && !covered(); k += 2) {
    std::vector<double> batch;
    for (int j = k; j < k + 2 && j <= config.max_expansions; ++j) {
      const double f = std::pow(config.expansion_factor, j);
      batch.push_back(config.alpha_initial * f);
      batch.push_back(config.alpha_initial / f);
    }
    evaluate(batch);
  }
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });

  std::vector<const AlphaSample*> feasible;
  for (const auto& s : samples) {
    if (s.qbar) feasible.push_back(&s);
  }
  if (feasible.empty()) {
    throw Error(ErrorCode::no_bracket, "no feasible alpha among " + std::to_string(samples.size()) + " samples");
  }
  double trend = *feasible.back()->qbar - *feasible.front()->qbar;
  bool up = false, down = false;
  for (std::size_t i = 1; i < feasible.size(); ++i) {
    const double d = *feasible[i]->qbar - *feasible[i - 1]->qbar;
    up = up || d > 0.0;
    down = down || d < 0.0;
  }
  if (up && down) out.warnings.push_back("NonMonotone: qbar is not monotone on the bracket grid");
  if (trend == 0.0) trend = 1.0;

  auto pick = [&](double target, bool leftmost) {
    auto cs = crossings(samples, target);
    if (cs.empty()) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto* s : feasible) {
        lo = std::min(lo, *s->qbar);
        hi = std::max(hi, *s->qbar);
      }
      throw Error(ErrorCode::no_bracket, "qbar=" + fmt(target) + " not reached; sampled qbar in [" +
                                             fmt(lo) + ", " + fmt(hi) + "]");
    }
    return leftmost ? cs.front() : cs.back();
  };
  // Outermost crossings give the widest admissible alpha interval.
  const Crossing c_min = pick(config.qbar_min, trend > 0.0);
  const Crossing c_max = pick(config.qbar_max, trend < 0.0);
  BisectionResult r[2];
  parallel_for(2, [&](std::size_t i) {
    r[i] = i == 0 ? bisect_qbar(pair, config, c_min, config.qbar_min)
                  : bisect_qbar(pair, config, c_max, config.qbar_max);
  });
  out.alpha_min = r[0].alpha;
  out.qbar_at_min = r[0].qbar;
  out.alpha_max = r[1].alpha;
  out.qbar_at_max = r[1].qbar;
  for (auto& rr : r) {
    for (auto& w : rr.warnings) out.warnings.push_back(std::move(w));
  }
  return out;
}

OptimizationResult minimize_consistency(const BlockPair& pair, const InverseConfig& config) {
  return minimize_consistency(pair, config, solve_alpha_bounds(pair, config));
}

OptimizationResult minimize_consistency(const BlockPair& pair, const InverseConfig& config,
                                        const AlphaBounds& bounds) {
  config.validate();
  OptimizationResult res;
  res.alpha_min = bounds.alpha_min;
  res.alpha_max = bounds.alpha_max;
  res.bound_samples = bounds.samples;
  res.warnings = bounds.warnings;
  double a = bounds.lower();
  double b = bounds.upper();
  if (!(b >= a) || !(a > 0.0)) {
    throw Error(ErrorCode::empty_feasible_interval, "[" + fmt(a) + ", " + fmt(b) + "]");
  }
  auto probe = [&](double alpha) {
    const auto v = consistency(pair, alpha, config);
    res.probes.push_back({alpha, v});
    if (!v) throw InfeasibleProbe{alpha};
    return *v;
  };
  auto best_probe = [&]() -> const Probe* {
    const Probe* best = nullptr;
    for (const auto& p : res.probes) {
      if (p.consistency && (best == nullptr || *p.consistency < *best->consistency)) best = &p;
    }
    return best;
  };

  for (double end : {a, b}) {
    try {
      probe(end);
    } catch (const InfeasibleProbe&) {
      res.warnings.push_back("InfeasibleProbe: bound alpha=" + fmt(end));
    }
  }
  constexpr int kMaxRestarts = 16;
  for (int restart = 0; restart <= kMaxRestarts && b > a; ++restart) {
    try {
      brent_minimize(probe, a, b, config.alpha_rel_tol, config.max_minimizer_iterations);
      break;
    } catch (const InfeasibleProbe& bad) {
      res.warnings.push_back("InfeasibleProbe: alpha=" + fmt(bad.alpha));
      const Probe* best = best_probe();
      if (best == nullptr) {
        // Keep the larger side of the split interval.
        if (bad.alpha - a > b - bad.alpha) {
          b = bad.alpha;
        } else {
          a = bad.alpha;
        }
      } else {
        double lo = a, hi = b;
        for (const auto& p : res.probes) {
          if (p.consistency) continue;
          if (p.alpha < best->alpha) lo = std::max(lo, p.alpha);
          if (p.alpha > best->alpha) hi = std::min(hi, p.alpha);
        }
        a = lo;
        b = hi;
      }
      res.warnings.push_back("FeasibilityShrink: [" + fmt(a) + ", " + fmt(b) + "]");
    }
  }
  const Probe* best = best_probe();
  if (best == nullptr) throw Error(ErrorCode::empty_feasible_interval, "no feasible probe");
  res.alpha_opt = best->alpha;
  res.at_optimum = evaluate_pair(pair, res.alpha_opt, config);
  res.consistency = res.at_optimum.consistency;
  res.period = pair.first.field->period();
  res.mse = mse_from_consistency(res.consistency, res.period);
  res.qbar = res.at_optimum.qbar;
  if (res.at_optimum.ambiguous) res.warnings.push_back("Ambiguous: two admissible solutions at alpha_opt");
  res.kotin_first = kotin_check(assemble_coefficients(pair.first, config.convention), res.alpha_opt);
  res.kotin_second = kotin_check(assemble_coefficients(pair.second, config.convention), res.alpha_opt);
  return res;
}

double mse_from_consistency(double consistency, double period) {
  if (!(period > 0.0)) throw Error(ErrorCode::invalid_argument, "period must be positive");
  return std::sqrt(std::max(consistency, 0.0) / period);
}

double signed_wall_flux(const AreaField& field, double t, double x_b, double x) {
  return x >= x_b ? field.wall_flux(t, x_b, x) : -field.wall_flux(t, x, x_b);
}

FlowCurves reconstruct_flow(const AreaField& field, const Block& block,
                            const PeriodicSolution& solution, const std::vector<double>& positions) {
  FlowCurves out;
  out.t = solution.t;
  out.x = positions;
  out.q.reserve(positions.size());
  for (double x : positions) {
    std::vector<double> q(out.t.size());
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      q[k] = solution.q[k] + signed_wall_flux(field, out.t[k], block.x_start, x);
    }
    out.q.push_back(std::move(q));
  }
  return out;
}

std::vector<double> fractional_positions(double x_start, double x_end,
                                         const std::vector<double>& fractions) {
  std::vector<double> x;
  for (double f : fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw Error(ErrorCode::x_out_of_range, "fraction " + fmt(f));
    x.push_back(x_start + f * (x_end - x_start));
  }
  return x;
}

}  // namespace pulseflow
