#pragma once
// Independent reference computations used by the tests. Nothing here calls the library's solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Root of w e^w = z on [lo, hi] by plain bisection.
inline double bisect_w(double z, double lo = -1.0, double hi = 50.0) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < z) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Root of a decreasing function f on [lo, hi].
inline double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// MNL single-period expected margin sum_i rho_i (p_i - delta_i), computed from scratch.
inline double mnl_margin(const std::vector<double>& q, double beta, const std::vector<double>& delta,
                         const std::vector<double>& p) {
  double denom = 1.0;
  std::vector<double> e(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    e[i] = std::exp(q[i] + beta * p[i]);
    denom += e[i];
  }
  double r = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) r += e[i] / denom * (p[i] - delta[i]);
  return r;
}

/// Nelder-Mead maximization.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double scale, int iters = 20000) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += scale;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(s[i]);
  for (int it = 0; it < iters; ++it) {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : idx) {
      s2.push_back(s[i]);
      f2.push_back(fv[i]);
    }
    s = s2;
    fv = f2;
    if (std::abs(fv[0] - fv[n]) < 1e-15) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) c[j] += s[i][j] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) p[j] = c[j] + t * (s[n][j] - c[j]);
      return p;
    };
    auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr > fv[0]) {
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe > fr) {
        s[n] = xe;
        fv[n] = fe;
      } else {
        s[n] = xr;
        fv[n] = fr;
      }
    } else if (fr > fv[n - 1]) {
      s[n] = xr;
      fv[n] = fr;
    } else {
      auto xc = along(0.5);
      const double fc = f(xc);
      if (fc > fv[n]) {
        s[n] = xc;
        fv[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) s[i][j] = s[0][j] + 0.5 * (s[i][j] - s[0][j]);
          fv[i] = f(s[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] > fv[best]) best = i;
  return s[best];
}

/// Solves a dense square system by Gaussian elimination with partial pivoting. Returns false if singular.
inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-12) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

/// Maximizes c.x over {A x <= b} (rows given as <= after sign normalization) by enumerating every
/// basis of n active rows. Returns -inf when no vertex is feasible.
inline double vertex_enumeration(const std::vector<double>& c, const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b) {
  const std::size_t n = c.size(), m = a.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
    if (depth == n) {
      std::vector<std::vector<double>> sa;
      std::vector<double> sb, x;
      for (auto r : pick) {
        sa.push_back(a[r]);
        sb.push_back(b[r]);
      }
      if (!solve_square(sa, sb, x)) return;
      for (std::size_t r = 0; r < m; ++r) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += a[r][j] * x[j];
        if (ax > b[r] + 1e-9) return;
      }
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += c[j] * x[j];
      best = std::max(best, v);
      return;
    }
    for (std::size_t r = start; r < m; ++r) {
      pick[depth] = r;
      rec(r + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Every partition of {0..items-1} into a subset of the candidate options (given as item lists),
/// as lists of option indices.
inline std::vector<std::vector<int>> all_partitions(const std::vector<std::vector<int>>& options, int items) {
  std::vector<std::vector<int>> out;
  std::vector<int> chosen;
  std::vector<char> used(static_cast<std::size_t>(items), 0);
  std::function<void()> rec = [&] {
    int first = -1;
    for (int i = 0; i < items; ++i)
      if (!used[static_cast<std::size_t>(i)]) {
        first = i;
        break;
      }
    if (first < 0) {
      out.push_back(chosen);
      return;
    }
    for (std::size_t k = 0; k < options.size(); ++k) {
      const auto& o = options[k];
      if (std::find(o.begin(), o.end(), first) == o.end()) continue;
      bool ok = true;
      for (int i : o) ok = ok && !used[static_cast<std::size_t>(i)];
      if (!ok) continue;
      for (int i : o) used[static_cast<std::size_t>(i)] = 1;
      chosen.push_back(static_cast<int>(k));
      rec();
      chosen.pop_back();
      for (int i : o) used[static_cast<std::size_t>(i)] = 0;
    }
  };
  rec();
  return out;
}

}  // namespace oracle
