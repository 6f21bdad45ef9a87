// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#include "qwalk/experiment_fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"

namespace qwalk {

namespace {

constexpr double kProbabilityFloor = 1e-300;

}  // namespace

// --- detection -------------------------------------------------------------------

void DetectionModel::validate() const {
  if (!std::isfinite(efficiency) || efficiency < 0.0 || efficiency > 1.0) {
    throw InvalidArgument("detection efficiency must lie in [0, 1]");
  }
  double sum = 0.0;
  for (const auto& [offset, weight] : kernel) {
    if (!std::isfinite(weight) || weight < 0.0) {
      throw InvalidArgument("detection kernel weights must be nonnegative");
    }
    sum += weight;
  }
  if (efficiency < 1.0 && std::abs(sum - 1.0) > 1e-12) {
    throw InvalidArgument("detection kernel weights must sum to 1");
  }
}

int DetectionModel::reach() const {
  if (efficiency >= 1.0) return 0;
  int r = 0;
  for (const auto& [offset, weight] : kernel) {
    if (weight > 0.0) r = std::max(r, std::abs(offset));
  }
  return r;
}

SiteDistribution apply_detection(const SiteDistribution& truth, const DetectionModel& detection) {
  detection.validate();
  const int reach = detection.reach();
  SiteDistribution out;
  out.halfwidth = truth.halfwidth + reach;
  out.p.assign(static_cast<std::size_t>(2 * out.halfwidth + 1), 0.0);
  const double eta = detection.efficiency;
  for (int x = -truth.halfwidth; x <= truth.halfwidth; ++x) {
    const double p = truth.at(x);
    if (p == 0.0) continue;
    out.p[static_cast<std::size_t>(x + out.halfwidth)] += eta * p;
    if (eta < 1.0) {
      for (const auto& [offset, weight] : detection.kernel) {
        if (weight == 0.0) continue;
        out.p[static_cast<std::size_t>(x + offset + out.halfwidth)] += (1.0 - eta) * weight * p;
      }
    }
  }
  return out;
}

SiteDistribution predicted_distribution(const WalkParameters& walk, const DecoherenceParameters& dec,
                                        const InitialState& init, const DetectionModel& detection) {
  const DensityMatrix rho0 = DensityMatrix::from_pure(make_initial_state(init, walk));
  const DensityMatrix rho = evolve_density(rho0, walk, dec);
  return apply_detection({walk.lattice_halfwidth(), position_distribution(rho)}, detection);
}

// --- histograms ------------------------------------------------------------------

std::int64_t PositionHistogram::total() const {
  std::int64_t n = 0;
  for (const auto& [site, count] : counts) n += count;
  return n;
}

PositionHistogram synthesize_histogram(const SiteDistribution& observed, int steps,
                                       std::int64_t atoms, std::uint64_t seed) {
  if (atoms < 1) throw InvalidArgument("need at least one atom");
  std::vector<double> cdf(observed.p.size());
  std::partial_sum(observed.p.begin(), observed.p.end(), cdf.begin());
  const double total = cdf.empty() ? 0.0 : cdf.back();
  if (!(total > 0.0)) throw InvalidArgument("distribution has no weight");
  Rng rng(seed);
  PositionHistogram hist;
  hist.steps = steps;
  std::vector<std::int64_t> counts(observed.p.size(), 0);
  for (std::int64_t i = 0; i < atoms; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Skip zero-probability bins that share the cumulative value.
    if (it == cdf.end()) it = std::prev(cdf.end());
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) hist.counts[static_cast<int>(i) - observed.halfwidth] = counts[i];
  }
  return hist;
}

Interval clopper_pearson(std::int64_t k, std::int64_t n, double confidence) {
  if (n < 1 || k < 0 || k > n) throw InvalidArgument("Clopper-Pearson needs 0 <= k <= N, N >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("confidence must lie in (0, 1)");
  const double tail = 0.5 * (1.0 - confidence);
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  Interval out{0.0, 1.0};
  if (k > 0) out.lower = boost::math::ibeta_inv(kk, nn - kk + 1.0, tail);
  if (k < n) out.upper = boost::math::ibeta_inv(kk + 1.0, nn - kk, 1.0 - tail);
  return out;
}

// --- fitting ---------------------------------------------------------------------

namespace {

struct Point {
  double theta;
  double p_spin;
  double p_space;
};

Point project(Point p) {
  p.theta = std::clamp(p.theta, 0.0, kTwoPi);
  p.p_spin = std::clamp(p.p_spin, 0.0, 1.0);
  p.p_space = std::clamp(p.p_space, 0.0, 1.0);
  const double sum = p.p_spin + p.p_space;
  if (sum > 1.0) {
    p.p_spin /= sum;
    p.p_space /= sum;
  }
  return p;
}

double distance2(const Point& a, const Point& b) {
  const double dt = a.theta - b.theta;
  const double dc = a.p_spin - b.p_spin;
  const double ds = a.p_space - b.p_space;
  return dt * dt + dc * dc + ds * ds;
}

// Which coordinates of Point a vector of free parameters maps to.
struct Layout {
  std::vector<int> index;  // 0 theta, 1 p_spin, 2 p_space

  Point to_point(const std::vector<double>& v, Point base) const {
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] == 0) base.theta = v[i];
      if (index[i] == 1) base.p_spin = v[i];
      if (index[i] == 2) base.p_space = v[i];
    }
    return base;
  }
  std::vector<double> from_point(const Point& p) const {
    std::vector<double> v;
    for (int i : index) v.push_back(i == 0 ? p.theta : (i == 1 ? p.p_spin : p.p_space));
    return v;
  }
};

double coordinate(const Point& p, int i) { return i == 0 ? p.theta : (i == 1 ? p.p_spin : p.p_space); }

void set_coordinate(Point& p, int i, double v) {
  if (i == 0) p.theta = v;
  if (i == 1) p.p_spin = v;
  if (i == 2) p.p_space = v;
}

struct NelderMeadResult {
  std::vector<double> x;
  double f;
  int evaluations;
  bool converged;
};

// Minimizes f from x0 with initial steps `scale`.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& scale,
                             int max_evaluations, double ftol, double xtol) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += scale[i];
  std::vector<double> fv(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  bool converged = false;
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) size = std::max(size, std::abs(simplex[i][j] - simplex[best][j]));
    }
    if (fv[worst] - fv[best] <= ftol && size <= xtol) {
      converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;
    }
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
      return x;
    };
    const auto xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const auto xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const auto xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        simplex[worst] = xc;
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
          }
          fv[i] = eval(simplex[i]);
        }
      }
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[best], fv[best], evals, converged};
}

}  // namespace

Fitter::Fitter(FitSpec spec) : spec_(std::move(spec)) {
  spec_.detection.validate();
  if (spec_.steps < 0) throw InvalidArgument("step count must be nonnegative");
  if (!(spec_.confidence > 0.0 && spec_.confidence < 1.0)) {
    throw InvalidArgument("confidence must lie in (0, 1)");
  }
  if (!(spec_.theta_grid_step > 0.0) || !(spec_.rate_grid_step > 0.0)) {
    throw InvalidArgument("grid steps must be positive");
  }
  // Validates the fixed rates.
  DecoherenceParameters(spec_.free_spin ? 0.0 : spec_.p_spin, spec_.free_space ? 0.0 : spec_.p_space);
  halfwidth_ = required_halfwidth(spec_.init, spec_.steps) + spec_.detection.reach();
  allowed_ = structural_mask();
}

SiteDistribution Fitter::model(double theta, double p_spin, double p_space) const {
  const WalkParameters walk(theta, spec_.steps, required_halfwidth(spec_.init, spec_.steps),
                            spec_.alternating_shift);
  return predicted_distribution(walk, DecoherenceParameters(p_spin, p_space), spec_.init,
                                spec_.detection);
}

std::vector<bool> Fitter::structural_mask() const {
  // Exact zeros at a generic parameter point are zeros at every point.
  const double theta = spec_.free_theta ? 1.2345 : spec_.theta;
  const double pc = spec_.free_spin ? 0.3 : spec_.p_spin;
  const double ps = spec_.free_space ? 0.2 : spec_.p_space;
  const SiteDistribution d = model(theta, std::min(pc, 1.0 - ps), ps);
  std::vector<bool> mask(d.p.size());
  for (std::size_t i = 0; i < d.p.size(); ++i) mask[i] = d.p[i] > 0.0;
  return mask;
}

void Fitter::build_grid() {
  std::vector<double> thetas;
  if (spec_.free_theta) {
    for (double t = 0.0; t < kTwoPi - 1e-12; t += spec_.theta_grid_step) thetas.push_back(t);
  } else {
    thetas.push_back(spec_.theta);
  }
  std::vector<std::pair<double, double>> rates;
  const bool both = spec_.free_spin && spec_.free_space;
  const double step = both ? 5.0 * spec_.rate_grid_step : spec_.rate_grid_step;
  const int count = static_cast<int>(std::floor(1.0 / step + 1e-9));
  auto grid_value = [&](int i) { return std::min(1.0, i * step); };
  if (both) {
    for (int i = 0; i <= count; ++i) {
      for (int j = 0; i + j <= count; ++j) rates.emplace_back(grid_value(i), grid_value(j));
    }
  } else if (spec_.free_spin) {
    for (int i = 0; i <= count; ++i) rates.emplace_back(grid_value(i), spec_.p_space);
  } else if (spec_.free_space) {
    for (int j = 0; j <= count; ++j) rates.emplace_back(spec_.p_spin, grid_value(j));
  } else {
    rates.emplace_back(spec_.p_spin, spec_.p_space);
  }
  grid_.clear();
  grid_.reserve(thetas.size() * rates.size());
  for (double t : thetas) {
    for (const auto& [pc, ps] : rates) {
      if (pc + ps > 1.0 + 1e-12) continue;
      grid_.push_back({t, pc, ps, model(t, pc, std::min(ps, 1.0 - pc))});
    }
  }
}

namespace {

struct DenseCounts {
  std::vector<double> counts;
  double total = 0.0;
};

DenseCounts densify(const PositionHistogram& hist, int halfwidth) {
  DenseCounts d;
  d.counts.assign(static_cast<std::size_t>(2 * halfwidth + 1), 0.0);
  for (const auto& [site, count] : hist.counts) {
    if (count < 0) throw InvalidArgument("histogram counts must be nonnegative");
    if (site < -halfwidth || site > halfwidth) {
      throw InvalidArgument("histogram site " + std::to_string(site) +
                            " lies outside the reachable range +-" + std::to_string(halfwidth));
    }
    d.counts[static_cast<std::size_t>(site + halfwidth)] += static_cast<double>(count);
    d.total += static_cast<double>(count);
  }
  return d;
}

double dense_log_likelihood(const DenseCounts& c, const std::vector<bool>& allowed,
                            const SiteDistribution& model) {
  double ll = 0.0;
  for (std::size_t i = 0; i < c.counts.size(); ++i) {
    if (!allowed[i] || c.counts[i] == 0.0) continue;
    ll += c.counts[i] * std::log(std::max(model.p[i], kProbabilityFloor));
  }
  return ll;
}

}  // namespace

double Fitter::log_likelihood(const PositionHistogram& hist, double theta, double p_spin,
                              double p_space) const {
  return dense_log_likelihood(densify(hist, halfwidth_), allowed_, model(theta, p_spin, p_space));
}

FitResult Fitter::fit(const PositionHistogram& hist) {
  if (hist.total() <= 0) throw InvalidArgument("histogram is empty");
  if (hist.steps != spec_.steps) {
    throw InvalidArgument("histogram has " + std::to_string(hist.steps) + " steps, fit expects " +
                          std::to_string(spec_.steps));
  }
  const DenseCounts counts = densify(hist, halfwidth_);
  FitResult result;
  for (std::size_t i = 0; i < allowed_.size(); ++i) {
    if (allowed_[i]) continue;
    const int site = static_cast<int>(i) - halfwidth_;
    if (counts.counts[i] > 0.0) {
      result.excluded_sites.push_back(site);
      result.warnings.push_back("site " + std::to_string(site) + " has " +
                                std::to_string(static_cast<std::int64_t>(counts.counts[i])) +
                                " counts but zero model probability; excluded from the likelihood");
    }
  }

  int evaluations = 0;
  auto ll_at = [&](const Point& p) {
    ++evaluations;
    const Point q = project(p);
    return dense_log_likelihood(counts, allowed_, model(q.theta, q.p_spin, q.p_space));
  };

  // Grid seeding.
  if (grid_.empty()) build_grid();
  Point best{spec_.theta, spec_.p_spin, spec_.p_space};
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const GridPoint& g : grid_) {
    const double ll = dense_log_likelihood(counts, allowed_, g.dist);
    if (ll > best_ll || (ll == best_ll && g.p_spin < best.p_spin)) {
      best_ll = ll;
      best = {g.theta, g.p_spin, g.p_space};
    }
  }

  Layout layout;
  if (spec_.free_theta) layout.index.push_back(0);
  if (spec_.free_spin) layout.index.push_back(1);
  if (spec_.free_space) layout.index.push_back(2);

  // Local refinement with a quadratic penalty outside the feasible box.
  bool converged = true;
  if (!layout.index.empty()) {
    auto objective = [&](const std::vector<double>& v) {
      const Point raw = layout.to_point(v, best);
      const Point q = project(raw);
      return -ll_at(q) + 1e4 * distance2(raw, q);
    };
    std::vector<double> scale;
    for (int i : layout.index) {
      scale.push_back(i == 0 ? 0.5 * spec_.theta_grid_step : 0.5 * spec_.rate_grid_step);
    }
    const auto nm = nelder_mead(objective, layout.from_point(best), scale, spec_.max_evaluations,
                                1e-9, 1e-7);
    converged = nm.converged;
    const Point refined = project(layout.to_point(nm.x, best));
    const double refined_ll = ll_at(refined);
    if (refined_ll >= best_ll) {
      best = refined;
      best_ll = refined_ll;
    }
  }

  result.theta = best.theta;
  result.p_spin = best.p_spin;
  result.p_space = best.p_space;
  result.log_likelihood = best_ll;
  result.converged = converged;

  const SiteDistribution fitted = model(best.theta, best.p_spin, best.p_space);
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    if (counts.counts[i] == 0.0) continue;
    BinContribution b;
    b.site = static_cast<int>(i) - halfwidth_;
    b.count = static_cast<std::int64_t>(counts.counts[i]);
    b.probability = fitted.p[i];
    b.log_likelihood = allowed_[i] ? counts.counts[i] * std::log(std::max(fitted.p[i], kProbabilityFloor)) : 0.0;
    result.bins.push_back(b);
  }

  if (!converged) {
    result.evaluations = evaluations;
    throw FitConvergenceError("likelihood refinement did not converge", result);
  }

  // Profile-likelihood intervals.
  const boost::math::chi_squared chi2(1.0);
  const double drop = 0.5 * boost::math::quantile(chi2, spec_.confidence);

  auto profile = [&](int param, double value) {
    Point start = best;
    set_coordinate(start, param, value);
    std::vector<int> others;
    for (int i : layout.index) {
      if (i != param) others.push_back(i);
    }
    if (others.empty()) return ll_at(start);
    if (others.size() == 1) {
      const int o = others.front();
      double lo;
      double hi;
      if (o == 0) {
        lo = std::max(0.0, best.theta - 0.3);
        hi = std::min(kTwoPi, best.theta + 0.3);
      } else {
        const double other_rate = o == 1 ? start.p_space : start.p_spin;
        lo = 0.0;
        hi = std::max(0.0, 1.0 - other_rate);
      }
      if (hi <= lo) return ll_at(start);
      auto neg = [&](double v) {
        Point p = start;
        set_coordinate(p, o, v);
        return -ll_at(p);
      };
      const auto [xmin, fmin] = boost::math::tools::brent_find_minima(neg, lo, hi, 30);
      // Brent may miss the seed point when the bracket is wide.
      return std::max(-fmin, -neg(coordinate(best, o)));
    }
    Layout inner{others};
    auto objective = [&](const std::vector<double>& v) {
      Point raw = inner.to_point(v, start);
      set_coordinate(raw, param, value);
      const Point q = project(raw);
      return -ll_at(q) + 1e4 * distance2(raw, q);
    };
    std::vector<double> scale(others.size(), 0.0);
    for (std::size_t i = 0; i < others.size(); ++i) {
      scale[i] = others[i] == 0 ? 0.5 * spec_.theta_grid_step : 0.5 * spec_.rate_grid_step;
    }
    const auto nm = nelder_mead(objective, inner.from_point(start), scale, spec_.max_evaluations,
                                1e-9, 1e-7);
    return -nm.f;
  };

  auto interval_for = [&](int param) {
    const double mle = coordinate(best, param);
    double lower_bound = 0.0;
    double upper_bound = 1.0;
    if (param == 0) {
      lower_bound = std::max(0.0, mle - 0.25 * kPi);
      upper_bound = std::min(kTwoPi, mle + 0.25 * kPi);
    } else {
      const double other = param == 1 ? best.p_space : best.p_spin;
      upper_bound = 1.0 - (param == 1 ? (spec_.free_space ? 0.0 : other) : (spec_.free_spin ? 0.0 : other));
    }
    auto excess = [&](double v) { return best_ll - profile(param, v) - drop; };
    auto solve_side = [&](double bound) {
      if (bound == mle) return bound;
      const double fb = excess(bound);
      if (fb <= 0.0) return bound;
      const double fa = -drop;
      boost::math::tools::eps_tolerance<double> tol(30);
      std::uintmax_t iters = 60;
      const auto [a, b] = mle < bound
                              ? boost::math::tools::toms748_solve(excess, mle, bound, fa, fb, tol, iters)
                              : boost::math::tools::toms748_solve(excess, bound, mle, fb, fa, tol, iters);
      return 0.5 * (a + b);
    };
    return Interval{solve_side(lower_bound), solve_side(upper_bound)};
  };

  if (spec_.free_theta) result.theta_ci = interval_for(0);
  if (spec_.free_spin) result.p_spin_ci = interval_for(1);
  if (spec_.free_space) result.p_space_ci = interval_for(2);
  result.evaluations = evaluations;
  return result;
}

FitResult fit(const PositionHistogram& hist, const FitSpec& spec) {
  Fitter fitter(spec);
  return fitter.fit(hist);
}

}  // namespace qwalk
