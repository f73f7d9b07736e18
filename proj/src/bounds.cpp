#include "uip/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uip/errors.hpp"
#include "uip/numerics.hpp"
#include "uip/optim.hpp"
#include "uip/pricing.hpp"
#include "uip/rng.hpp"

namespace uip::bounds {

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::upper_backward: return "upper_backward";
    case BoundKind::lower_backward: return "lower_backward";
    case BoundKind::dfa: return "dfa";
    case BoundKind::fluid: return "fluid";
    case BoundKind::static_approx: return "static";
  }
  return "unknown";
}

std::string to_string(BoundStatus status) {
  switch (status) {
    case BoundStatus::certified: return "certified";
    case BoundStatus::uncertified: return "uncertified";
    case BoundStatus::stalled: return "stalled";
  }
  return "unknown";
}

std::vector<double> PriceTrajectory::column(std::size_t i) const {
  std::vector<double> c(static_cast<std::size_t>(periods));
  for (int t = 1; t <= periods; ++t) c[static_cast<std::size_t>(t - 1)] = at(t, i);
  return c;
}

PriceTrajectory PriceTrajectory::from_columns(const std::vector<std::vector<double>>& columns, int periods) {
  PriceTrajectory p;
  p.periods = periods;
  p.options = columns.size();
  p.prices.resize(static_cast<std::size_t>(periods) * columns.size());
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].size() != static_cast<std::size_t>(periods)) throw DimensionMismatch("column length differs from T");
    for (int t = 1; t <= periods; ++t)
      p.prices[static_cast<std::size_t>(t - 1) * columns.size() + i] = columns[i][static_cast<std::size_t>(t - 1)];
  }
  return p;
}

bool check_monotone(const PriceTrajectory& trajectory, std::span<const double> canonical_salvage, double sign) {
  for (std::size_t i = 0; i < trajectory.options; ++i) {
    if (trajectory.periods >= 1 && sign * trajectory.at(1, i) < canonical_salvage[i] - 1e-12) return false;
    for (int t = 2; t <= trajectory.periods; ++t)
      if (sign * trajectory.at(t, i) < sign * trajectory.at(t - 1, i) - 1e-12) return false;
  }
  return true;
}

nlohmann::json BoundResult::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["value"] = value;
  j["status"] = to_string(status);
  if (certificate) j["certificate"] = *certificate;
  if (!per_option.empty()) j["per_option"] = per_option;
  return j;
}

// ---------------------------------------------------------------------------------------------
// Backward recursions and DFA

double option_upper(const OptionTable& tab, std::size_t i, std::vector<double>* tau) {
  const int T = tab.horizon;
  const std::size_t K = tab.types();
  const double beta = tab.beta;
  double r = tab.salvage[i];
  if (tau) tau->assign(static_cast<std::size_t>(T), 0.0);
  for (int t = 1; t <= T; ++t) {
    double acc = 0.0, price = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < K; ++w) {
      const double g = numerics::lambert_w_exp(tab.q(i, w) + beta * r - 1.0);
      acc += tab.pmf[w] * g;
      if (tab.pmf[w] > 0.0) price = std::max(price, r - (1.0 + g) / beta);
    }
    if (tau) (*tau)[static_cast<std::size_t>(t - 1)] = price;
    r += tab.mu * acc / (-beta);
  }
  return r;
}

double dfa_value(const OptionTable& tab, std::span<const double> tau, std::vector<double>* availability) {
  const int T = tab.horizon;
  const std::size_t n = tab.size(), K = tab.types();
  if (tau.size() != static_cast<std::size_t>(T) * n) throw DimensionMismatch("trajectory shape does not match (T, N)");
  std::vector<double> a(n, 1.0), e(n), rho(n);
  if (availability) {
    availability->assign(static_cast<std::size_t>(T + 1) * n, 1.0);
  }
  double value = 0.0;
  for (int t = T; t >= 1; --t) {
    const double* price = tau.data() + static_cast<std::size_t>(t - 1) * n;
    std::fill(rho.begin(), rho.end(), 0.0);
    for (std::size_t w = 0; w < K; ++w) {
      if (tab.pmf[w] == 0.0) continue;
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = tab.q(i, w) + tab.beta * price[i];
        m = std::max(m, e[i]);
      }
      double common = std::exp(-m);
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = std::exp(e[i] - m);
        common += a[i] * e[i];
      }
      for (std::size_t i = 0; i < n; ++i) rho[i] += tab.pmf[w] * e[i] / (common + (1.0 - a[i]) * e[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      value += tab.mu * a[i] * rho[i] * price[i];
      a[i] *= 1.0 - tab.mu * rho[i];
    }
    if (availability) std::copy(a.begin(), a.end(), availability->begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(t - 1) * n));
  }
  for (std::size_t i = 0; i < n; ++i) value += a[i] * tab.salvage[i];
  return value;
}

BoundResult backward_upper(const MarketInstance& instance, const OptionSet& set) {
  const auto tab = model::tabulate(instance, set);
  BoundResult res;
  res.kind = BoundKind::upper_backward;
  std::vector<std::vector<double>> cols(tab.size());
  res.per_option.resize(tab.size());
  for (std::size_t i = 0; i < tab.size(); ++i) {
    res.per_option[i] = tab.sign * option_upper(tab, i, &cols[i]);
    for (double& p : cols[i]) p *= tab.sign;
    res.value += res.per_option[i];
  }
  if (tab.size() == 0) res.value = 0.0;
  PriceTrajectory traj = PriceTrajectory::from_columns(cols, tab.horizon);
  traj.homogeneous = true;
  traj.monotone_ok = check_monotone(traj, tab.salvage, tab.sign);
  res.trajectory = std::move(traj);
  return res;
}

BoundResult backward_lower(const MarketInstance& instance, const OptionSet& set) {
  const auto tab = model::tabulate(instance, set);
  const std::size_t n = tab.size(), K = tab.types();
  std::vector<double> l = tab.salvage, next(n), x(n);
  for (int t = 1; t <= tab.horizon && n > 0; ++t) {
    next = l;
    for (std::size_t w = 0; w < K; ++w) {
      if (tab.pmf[w] == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) x[i] = tab.q(i, w) + tab.beta * l[i] - 1.0;
      const double lse = numerics::log_sum_exp(x);
      const double g = numerics::lambert_w_exp(lse);
      const double markup = -(1.0 + g) / tab.beta;
      for (std::size_t i = 0; i < n; ++i) {
        const double rho = g / (1.0 + g) * std::exp(x[i] - lse);
        next[i] += tab.mu * tab.pmf[w] * rho * markup;
      }
    }
    l.swap(next);
  }
  BoundResult res;
  res.kind = BoundKind::lower_backward;
  res.per_option.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.per_option[i] = tab.sign * l[i];
    res.value += res.per_option[i];
  }
  return res;
}

BoundResult dfa(const MarketInstance& instance, const OptionSet& set, const PriceTrajectory& trajectory) {
  const auto tab = model::tabulate(instance, set);
  if (trajectory.periods != tab.horizon || trajectory.options != tab.size() ||
      trajectory.prices.size() != static_cast<std::size_t>(tab.horizon) * tab.size())
    throw DimensionMismatch("trajectory is not T x N for this instance and set");
  std::vector<double> canon = trajectory.prices;
  for (double& p : canon) p *= tab.sign;
  BoundResult res;
  res.kind = BoundKind::dfa;
  res.value = tab.sign * dfa_value(tab, canon, &res.availability);
  const bool valid = trajectory.homogeneous && check_monotone(trajectory, tab.salvage, tab.sign);
  res.status = valid ? BoundStatus::certified : BoundStatus::uncertified;
  res.trajectory = trajectory;
  return res;
}

// ---------------------------------------------------------------------------------------------
// Fluid approximation: pairwise Frank-Wolfe over the probability polytope.

namespace {

class FluidProblem {
 public:
  FluidProblem(const OptionTable& tab, double eps)
      : tab_(tab), n_(tab.size()), k_(tab.types()), mu_t_(tab.mu * tab.horizon), eps_(eps) {
    salvage_sum_ = std::accumulate(tab.salvage.begin(), tab.salvage.end(), 0.0);
  }

  std::size_t dim() const { return n_ * k_; }

  double value(const std::vector<double>& x) const {
    double total = 0.0;
    for (std::size_t w = 0; w < k_; ++w) {
      if (tab_.pmf[w] == 0.0) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += x[i * k_ + w];
      const double x0 = 1.0 - s;
      if (!(x0 > 0.0)) return -std::numeric_limits<double>::infinity();
      const double l0 = std::log(x0);
      double part = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        const double r = x[i * k_ + w];
        const double p = (std::log(r) - l0 - tab_.q(i, w)) / tab_.beta;
        part += r * (p - tab_.salvage[i]);
      }
      total += tab_.pmf[w] * part;
    }
    return salvage_sum_ + mu_t_ * total;
  }

  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    g.assign(dim(), 0.0);
    for (std::size_t w = 0; w < k_; ++w) {
      if (tab_.pmf[w] == 0.0) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += x[i * k_ + w];
      const double x0 = 1.0 - s;
      const double l0 = std::log(x0);
      for (std::size_t i = 0; i < n_; ++i) {
        const double p = (std::log(x[i * k_ + w]) - l0 - tab_.q(i, w)) / tab_.beta;
        g[i * k_ + w] = mu_t_ * tab_.pmf[w] * (p - tab_.salvage[i] + 1.0 / (tab_.beta * x0));
      }
    }
  }

  optim::LinearProgram polytope() const {
    optim::LinearProgram lp;
    for (std::size_t v = 0; v < dim(); ++v) lp.add_variable(0.0, eps_, optim::kInf);
    for (std::size_t i = 0; i < n_; ++i) {
      optim::Constraint c{std::vector<double>(dim(), 0.0), optim::Relation::le, 1.0 / mu_t_};
      for (std::size_t w = 0; w < k_; ++w) c.coeffs[i * k_ + w] = tab_.pmf[w];
      lp.constraints.push_back(std::move(c));
    }
    for (std::size_t w = 0; w < k_; ++w) {
      optim::Constraint c{std::vector<double>(dim(), 0.0), optim::Relation::le, 1.0 - eps_};
      for (std::size_t i = 0; i < n_; ++i) c.coeffs[i * k_ + w] = 1.0;
      lp.constraints.push_back(std::move(c));
    }
    return lp;
  }

  std::vector<double> interior() const {
    const double c = 0.5 * std::min(1.0 / mu_t_, 1.0 / static_cast<double>(n_ + 1));
    return std::vector<double>(dim(), std::max(c, 2.0 * eps_));
  }

 private:
  const OptionTable& tab_;
  std::size_t n_, k_;
  double mu_t_, eps_, salvage_sum_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

BoundResult fluid(const MarketInstance& instance, const OptionSet& set, const FluidOptions& options) {
  const auto tab = model::tabulate(instance, set);
  if (!(tab.mu * tab.horizon > 0.0)) throw DomainError("fluid approximation needs mu * T > 0");
  BoundResult res;
  res.kind = BoundKind::fluid;
  if (tab.size() == 0) {
    res.certificate = 0.0;
    return res;
  }
  FluidProblem prob(tab, options.epsilon);
  optim::LinearProgram lp = prob.polytope();
  optim::LpBasis basis;
  bool have_basis = false;

  std::vector<double> x = prob.interior();
  std::vector<std::vector<double>> atoms{x};
  std::vector<double> weights{1.0};
  std::vector<double> g, d(x.size()), trial(x.size()), gt;

  auto oracle = [&](const std::vector<double>& grad) {
    lp.objective = grad;
    const auto sol = optim::simplex_solve(lp, have_basis ? &basis : nullptr);
    if (sol.status != optim::LpStatus::optimal) throw NumericalFailure("fluid LP oracle failed");
    basis = sol.basis;
    have_basis = true;
    return sol.primal;
  };

  double value = prob.value(x);
  double gap = optim::kInf;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    prob.gradient(x, g);
    const std::vector<double> s = oracle(g);
    gap = dot(g, s) - dot(g, x);
    value = prob.value(x);
    if (gap <= options.rel_tol * std::max(1.0, std::abs(value))) {
      converged = true;
      break;
    }
    // Away atom: the active atom with the lowest directional value.
    std::size_t away = 0;
    double low = optim::kInf;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      const double v = dot(g, atoms[a]);
      if (v < low) {
        low = v;
        away = a;
      }
    }
    for (std::size_t v = 0; v < x.size(); ++v) d[v] = s[v] - atoms[away][v];
    const double gmax = weights[away];
    // Exact line search on the concave restriction: bisection on the directional derivative.
    auto slope = [&](double step) {
      for (std::size_t v = 0; v < x.size(); ++v) trial[v] = x[v] + step * d[v];
      prob.gradient(trial, gt);
      return dot(gt, d);
    };
    double step;
    if (slope(gmax) >= 0.0) {
      step = gmax;
    } else {
      double lo = 0.0, hi = gmax;
      for (int b = 0; b < 60 && hi - lo > 1e-16 * gmax; ++b) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0) lo = mid;
        else hi = mid;
      }
      step = 0.5 * (lo + hi);
    }
    for (std::size_t v = 0; v < x.size(); ++v) x[v] += step * d[v];
    // Move weight from the away atom to s.
    std::size_t s_index = atoms.size();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      double diff = 0.0;
      for (std::size_t v = 0; v < x.size(); ++v) diff = std::max(diff, std::abs(atoms[a][v] - s[v]));
      if (diff < 1e-12) {
        s_index = a;
        break;
      }
    }
    if (s_index == atoms.size()) {
      atoms.push_back(s);
      weights.push_back(0.0);
    }
    weights[s_index] += step;
    weights[away] -= step;
    if (weights[away] <= 1e-15 && away != s_index) {
      atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away));
      weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(away));
    }
  }
  if (!converged) {
    prob.gradient(x, g);
    const std::vector<double> s = oracle(g);
    gap = dot(g, s) - dot(g, x);
    value = prob.value(x);
  }
  res.value = tab.sign * value;
  res.certificate = std::max(0.0, gap);
  res.status = converged ? BoundStatus::certified : BoundStatus::stalled;
  res.iterations = it;
  return res;
}

// ---------------------------------------------------------------------------------------------
// Static approximation: projected gradient ascent over stationary choice probabilities.

namespace {

class StaticProblem {
 public:
  StaticProblem(const OptionTable& tab, double eps)
      : tab_(tab), n_(tab.size()), k_(tab.types()), T_(tab.horizon), mu_(tab.mu), eps_(eps) {}

  std::size_t dim() const { return n_ * k_; }

  double survival(double m) const { return std::exp(T_ * std::log1p(-mu_ * m)); }

  double h(double m) const {
    const double lg = T_ * std::log1p(-mu_ * m);
    return -std::expm1(lg) / m;
  }

  double h_prime(double m) const {
    const double z = T_ * mu_ * m;
    if (z < 0.1) {
      // Series of sum_k (-1)^{k+1} (k-1) C(T,k) mu^k m^{k-2}.
      double c = T_ * (T_ - 1.0) / 2.0 * mu_ * mu_;  // C(T,2) mu^2
      double total = 0.0;
      double sign = -1.0;
      for (int k = 2; k < 60 && k <= T_; ++k) {
        const double term = sign * (k - 1) * c;
        total += term;
        if (std::abs(term) <= 1e-18 * std::abs(total)) break;
        c *= (T_ - k) / (k + 1.0) * mu_ * m;
        sign = -sign;
      }
      return total;
    }
    const double surv_minus = std::exp((T_ - 1.0) * std::log1p(-mu_ * m));
    return (T_ * mu_ * surv_minus * m - (1.0 - survival(m))) / (m * m);
  }

  double value(const std::vector<double>& x) const {
    std::vector<double> m(n_, 0.0), G(n_, 0.0);
    for (std::size_t w = 0; w < k_; ++w) {
      if (tab_.pmf[w] == 0.0) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n_; ++i) s += x[i * k_ + w];
      const double x0 = 1.0 - s;
      if (!(x0 > 0.0)) return -std::numeric_limits<double>::infinity();
      const double l0 = std::log(x0);
      for (std::size_t i = 0; i < n_; ++i) {
        const double r = x[i * k_ + w];
        m[i] += tab_.pmf[w] * r;
        G[i] += tab_.pmf[w] * r * (std::log(r) - l0 - tab_.q(i, w)) / tab_.beta;
      }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) total += h(m[i]) * G[i] + survival(m[i]) * tab_.salvage[i];
    return total;
  }

  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    std::vector<double> m(n_, 0.0), G(n_, 0.0), x0(k_, 1.0);
    for (std::size_t w = 0; w < k_; ++w) {
      for (std::size_t i = 0; i < n_; ++i) x0[w] -= x[i * k_ + w];
      if (tab_.pmf[w] == 0.0) continue;
      const double l0 = std::log(x0[w]);
      for (std::size_t i = 0; i < n_; ++i) {
        const double r = x[i * k_ + w];
        m[i] += tab_.pmf[w] * r;
        G[i] += tab_.pmf[w] * r * (std::log(r) - l0 - tab_.q(i, w)) / tab_.beta;
      }
    }
    std::vector<double> hv(n_), hp(n_), sp(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      hv[i] = h(m[i]);
      hp[i] = h_prime(m[i]);
      sp[i] = -T_ * mu_ * std::exp((T_ - 1.0) * std::log1p(-mu_ * m[i]));
    }
    g.assign(dim(), 0.0);
    for (std::size_t w = 0; w < k_; ++w) {
      if (tab_.pmf[w] == 0.0) continue;
      const double l0 = std::log(x0[w]);
      double H = 0.0;
      for (std::size_t j = 0; j < n_; ++j) H += hv[j] * x[j * k_ + w];
      for (std::size_t i = 0; i < n_; ++i) {
        const double p = (std::log(x[i * k_ + w]) - l0 - tab_.q(i, w)) / tab_.beta;
        g[i * k_ + w] = tab_.pmf[w] * (hp[i] * G[i] + hv[i] * p + hv[i] / tab_.beta + H / (tab_.beta * x0[w]) +
                                        sp[i] * tab_.salvage[i]);
      }
    }
  }

  /// Euclidean projection onto {x >= eps, sum_i x_iw <= 1 - eps} for every type.
  void project(std::vector<double>& x) const {
    const double cap = 1.0 - eps_ - static_cast<double>(n_) * eps_;
    std::vector<double> v(n_), u(n_);
    for (std::size_t w = 0; w < k_; ++w) {
      double pos = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        v[i] = x[i * k_ + w] - eps_;
        pos += std::max(0.0, v[i]);
      }
      double theta = 0.0;
      if (pos > cap) {
        u = v;
        std::sort(u.begin(), u.end(), std::greater<>());
        double cum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
          cum += u[j];
          const double t = (cum - cap) / static_cast<double>(j + 1);
          if (u[j] - t > 0.0) theta = t;
        }
      }
      for (std::size_t i = 0; i < n_; ++i) x[i * k_ + w] = eps_ + std::max(0.0, v[i] - theta);
    }
  }

  double ascend(std::vector<double>& x, int max_iter) const {
    project(x);
    double J = value(x);
    std::vector<double> g, xn(x.size());
    double step = 1e-3;
    int stagnant = 0;
    for (int it = 0; it < max_iter; ++it) {
      gradient(x, g);
      double Jn = -std::numeric_limits<double>::infinity();
      double moved = 0.0;
      for (;;) {
        for (std::size_t v = 0; v < x.size(); ++v) xn[v] = x[v] + step * g[v];
        project(xn);
        double lin = 0.0;
        moved = 0.0;
        for (std::size_t v = 0; v < x.size(); ++v) {
          lin += g[v] * (xn[v] - x[v]);
          moved = std::max(moved, std::abs(xn[v] - x[v]));
        }
        Jn = value(xn);
        if (Jn >= J + 1e-4 * lin) break;
        step *= 0.5;
        if (step < 1e-30) return J;
      }
      const double gain = Jn - J;
      x = xn;
      J = Jn;
      if (moved < 1e-15) break;
      if (gain <= 1e-15 * std::max(1.0, std::abs(J))) {
        if (++stagnant >= 20) break;
      } else {
        stagnant = 0;
      }
      step *= 2.0;
    }
    return J;
  }

  std::vector<double> myopic_start() const {
    std::vector<double> x(dim());
    for (std::size_t w = 0; w < k_; ++w) {
      const auto q = tab_.q_type(w);
      const auto opt = pricing::single_period_optimum(q, tab_.beta, tab_.salvage);
      for (std::size_t i = 0; i < n_; ++i) x[i * k_ + w] = opt.choice.probs[i];
    }
    return x;
  }

  std::vector<double> asymptotic_start() const {
    std::vector<double> x(dim());
    const double lambda = std::max(mu_ * T_, 1.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double kappa = model::aggregated_quality(tab_.q_row(i), tab_.pmf);
      for (std::size_t w = 0; w < k_; ++w) x[i * k_ + w] = std::exp(tab_.q(i, w) - kappa) / lambda;
    }
    return x;
  }

  std::vector<double> random_start(Rng& rng) const {
    std::vector<double> x(dim());
    std::vector<double> u(n_);
    for (std::size_t w = 0; w < k_; ++w) {
      double s = 0.0;
      for (auto& v : u) {
        v = rng.uniform() + 1e-12;
        s += v;
      }
      const double total = rng.uniform() * (1.0 - static_cast<double>(n_ + 1) * eps_);
      for (std::size_t i = 0; i < n_; ++i) x[i * k_ + w] = eps_ + total * u[i] / s;
    }
    return x;
  }

 private:
  const OptionTable& tab_;
  std::size_t n_, k_;
  double T_, mu_, eps_;
};

}  // namespace

BoundResult static_bound(const MarketInstance& instance, const OptionSet& set, const StaticOptions& options) {
  const auto tab = model::tabulate(instance, set);
  if (tab.horizon < 1) throw DomainError("static approximation needs T >= 1");
  BoundResult res;
  res.kind = BoundKind::static_approx;
  if (tab.size() == 0) return res;
  StaticProblem prob(tab, options.epsilon);
  std::vector<std::vector<double>> starts{prob.myopic_start(), prob.asymptotic_start()};
  Rng rng(substream_seed(options.seed, "multistart"));
  for (int s = 0; s < options.random_starts; ++s) starts.push_back(prob.random_start(rng));
  double best = -std::numeric_limits<double>::infinity();
  for (auto& x : starts) best = std::max(best, prob.ascend(x, options.max_iter));
  res.value = tab.sign * best;
  res.iterations = static_cast<int>(starts.size());
  return res;
}

}  // namespace uip::bounds
