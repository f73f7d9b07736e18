#include <algorithm>
#include <cmath>
#include <string>

#include "uip/errors.hpp"
#include "uip/optim.hpp"

namespace uip::optim {

void LinearProgram::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& c : constraints) c.coeffs.resize(objective.size(), 0.0);
}

namespace {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::le: return "<=";
    case Relation::eq: return "=";
    case Relation::ge: return ">=";
  }
  return "?";
}

nlohmann::json bound_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

constexpr int kDegenerateLimit = 1000;

class Tableau {
 public:
  Tableau(const LinearProgram& lp) : lp_(lp) { build(); }

  LpSolution solve(const LpBasis* warm);

 private:
  struct Row {
    Relation relation;
    double flip;
    int slack = -1;
    int artificial = -1;
    int user_index = -1;   // constraint index, or -1 for a bound row
    int bound_var = -1;    // variable index for bound rows
  };

  void build();
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
  double rhs(std::size_t r) const { return at(r, cols_); }
  void pivot(std::size_t r, std::size_t c);
  bool warm_start(const LpBasis& basis);
  // Returns false when unbounded.
  bool iterate(std::vector<double>& z, bool phase_one);
  LpSolution extract(LpStatus status);

  const LinearProgram& lp_;
  std::size_t n_ = 0;                 // structural variables
  std::vector<int> col_of_;           // structural var -> column (-1 when fixed)
  std::vector<int> var_of_;           // column -> structural var (-1 otherwise)
  std::vector<Row> rows_;
  std::vector<char> is_artificial_;
  std::size_t cols_ = 0, width_ = 0;
  std::vector<double> t_;
  std::vector<double> z1_, z2_;
  std::vector<int> basic_;
  double ctol_ = 1e-10;
  int iterations_ = 0;
  int degenerate_run_ = 0;
  bool bland_ = false;
};

void Tableau::build() {
  n_ = lp_.objective.size();
  if (lp_.lower.size() != n_ || lp_.upper.size() != n_) throw DimensionMismatch("bounds do not match variable count");
  for (const auto& c : lp_.constraints)
    if (c.coeffs.size() != n_) throw DimensionMismatch("constraint width does not match variable count");
  col_of_.assign(n_, -1);
  for (std::size_t j = 0; j < n_; ++j) {
    if (!std::isfinite(lp_.lower[j])) throw DomainError("lower bounds must be finite");
    if (lp_.upper[j] < lp_.lower[j]) throw DomainError("lower bound exceeds upper bound");
    if (lp_.upper[j] > lp_.lower[j]) {
      col_of_[j] = static_cast<int>(var_of_.size());
      var_of_.push_back(static_cast<int>(j));
    }
  }
  const std::size_t ns = var_of_.size();

  struct Pending {
    std::vector<double> a;  // over structural columns
    Relation rel;
    double b;
    int user_index;
    int bound_var;
  };
  std::vector<Pending> pending;
  for (std::size_t k = 0; k < lp_.constraints.size(); ++k) {
    const auto& c = lp_.constraints[k];
    Pending p{std::vector<double>(ns, 0.0), c.relation, c.rhs, static_cast<int>(k), -1};
    for (std::size_t j = 0; j < n_; ++j) {
      p.b -= c.coeffs[j] * lp_.lower[j];
      if (col_of_[j] >= 0) p.a[static_cast<std::size_t>(col_of_[j])] = c.coeffs[j];
    }
    pending.push_back(std::move(p));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (col_of_[j] < 0 || std::isinf(lp_.upper[j])) continue;
    Pending p{std::vector<double>(ns, 0.0), Relation::le, lp_.upper[j] - lp_.lower[j], -1, static_cast<int>(j)};
    p.a[static_cast<std::size_t>(col_of_[j])] = 1.0;
    pending.push_back(std::move(p));
  }

  // Column layout: structural | slack per inequality | artificial per >= or = row.
  std::size_t next = ns;
  for (auto& p : pending) {
    Row row{p.rel, 1.0};
    if (p.b < 0.0) {
      row.flip = -1.0;
      p.b = -p.b;
      for (double& v : p.a) v = -v;
      if (p.rel == Relation::le) row.relation = Relation::ge;
      else if (p.rel == Relation::ge) row.relation = Relation::le;
    }
    row.user_index = p.user_index;
    row.bound_var = p.bound_var;
    if (row.relation != Relation::eq) row.slack = static_cast<int>(next++);
    rows_.push_back(row);
  }
  for (auto& row : rows_)
    if (row.relation != Relation::le) row.artificial = static_cast<int>(next++);
  cols_ = next;
  width_ = cols_ + 1;
  is_artificial_.assign(cols_, 0);
  var_of_.resize(cols_, -1);

  t_.assign(rows_.size() * width_, 0.0);
  basic_.assign(rows_.size(), -1);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    for (std::size_t c = 0; c < ns; ++c) at(r, c) = pending[r].a[c];
    at(r, cols_) = pending[r].b;
    if (row.slack >= 0) at(r, static_cast<std::size_t>(row.slack)) = row.relation == Relation::le ? 1.0 : -1.0;
    if (row.artificial >= 0) {
      at(r, static_cast<std::size_t>(row.artificial)) = 1.0;
      is_artificial_[static_cast<std::size_t>(row.artificial)] = 1;
      basic_[r] = row.artificial;
    } else {
      basic_[r] = row.slack;
    }
  }

  double cmax = 1.0;
  z2_.assign(width_, 0.0);
  for (std::size_t c = 0; c < ns; ++c) {
    z2_[c] = lp_.objective[static_cast<std::size_t>(var_of_[c])];
    cmax = std::max(cmax, std::abs(z2_[c]));
  }
  ctol_ = 1e-11 * cmax;
  z1_.assign(width_, 0.0);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rows_[r].artificial < 0) continue;
    for (std::size_t c = 0; c < width_; ++c)
      if (!is_artificial_[c] || c == cols_) z1_[c] += at(r, c);
  }
}

void Tableau::pivot(std::size_t r, std::size_t c) {
  const double piv = at(r, c);
  double* pr = &t_[r * width_];
  for (std::size_t j = 0; j < width_; ++j) pr[j] /= piv;
  pr[c] = 1.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i == r) continue;
    double* pi = &t_[i * width_];
    const double f = pi[c];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width_; ++j) pi[j] -= f * pr[j];
    pi[c] = 0.0;
  }
  for (auto* z : {&z1_, &z2_}) {
    const double f = (*z)[c];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < width_; ++j) (*z)[j] -= f * pr[j];
    (*z)[c] = 0.0;
  }
  basic_[r] = static_cast<int>(c);
  ++iterations_;
}

bool Tableau::iterate(std::vector<double>& z, bool phase_one) {
  const std::size_t max_iter = 50000 + 50 * (rows_.size() + cols_);
  const double tol = phase_one ? 1e-11 : ctol_;
  for (;;) {
    if (static_cast<std::size_t>(iterations_) > max_iter) throw NumericalFailure("simplex iteration limit reached");
    // Entering column.
    int enter = -1;
    double best = tol;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (is_artificial_[c]) continue;
      if (z[c] > best) {
        enter = static_cast<int>(c);
        if (bland_) break;
        best = z[c];
      }
    }
    if (enter < 0) return true;
    const std::size_t ec = static_cast<std::size_t>(enter);
    // Ratio test.
    int leave = -1;
    double ratio = kInf;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const double a = at(r, ec);
      if (a <= 1e-10) continue;
      const double q = std::max(0.0, rhs(r)) / a;
      bool take = false;
      if (leave < 0 || q < ratio - 1e-12) {
        take = true;
      } else if (q <= ratio + 1e-12) {
        const std::size_t lr = static_cast<std::size_t>(leave);
        const bool art_new = is_artificial_[static_cast<std::size_t>(basic_[r])];
        const bool art_old = is_artificial_[static_cast<std::size_t>(basic_[lr])];
        if (art_new != art_old) take = art_new;
        else if (bland_) take = basic_[r] < basic_[lr];
        else take = a > at(lr, ec);
      }
      if (take) {
        leave = static_cast<int>(r);
        ratio = std::min(ratio, q);
      }
    }
    if (leave < 0) return false;
    if (ratio <= 1e-12) {
      if (++degenerate_run_ >= kDegenerateLimit) bland_ = true;
    } else {
      degenerate_run_ = 0;
    }
    pivot(static_cast<std::size_t>(leave), ec);
  }
}

bool Tableau::warm_start(const LpBasis& basis) {
  if (basis.entries.size() != rows_.size()) return false;
  std::vector<int> wanted;
  for (const auto& e : basis.entries) {
    int col = -1;
    switch (e.kind) {
      case LpBasis::Kind::structural:
        if (e.index >= 0 && static_cast<std::size_t>(e.index) < n_) col = col_of_[static_cast<std::size_t>(e.index)];
        break;
      case LpBasis::Kind::slack:
      case LpBasis::Kind::artificial:
        for (const auto& row : rows_)
          if (row.user_index == e.index) col = e.kind == LpBasis::Kind::slack ? row.slack : row.artificial;
        break;
      case LpBasis::Kind::bound_slack:
        for (const auto& row : rows_)
          if (row.bound_var == e.index) col = row.slack;
        break;
    }
    if (col < 0) return false;
    wanted.push_back(col);
  }
  std::vector<char> want(cols_, 0);
  for (int c : wanted) want[static_cast<std::size_t>(c)] = 1;
  for (int c : wanted) {
    const std::size_t cc = static_cast<std::size_t>(c);
    if (std::find(basic_.begin(), basic_.end(), c) != basic_.end()) continue;
    int row = -1;
    double best = 1e-9;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (want[static_cast<std::size_t>(basic_[r])]) continue;
      if (std::abs(at(r, cc)) > best) {
        best = std::abs(at(r, cc));
        row = static_cast<int>(r);
      }
    }
    if (row < 0) return false;
    pivot(static_cast<std::size_t>(row), cc);
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (rhs(r) < -1e-9) return false;
    if (is_artificial_[static_cast<std::size_t>(basic_[r])] && rhs(r) > 1e-9) return false;
  }
  return true;
}

LpSolution Tableau::solve(const LpBasis* warm) {
  bool warmed = false;
  if (warm) {
    const auto t0 = t_;
    const auto z10 = z1_, z20 = z2_;
    const auto b0 = basic_;
    warmed = warm_start(*warm);
    if (!warmed) {
      t_ = t0;
      z1_ = z10;
      z2_ = z20;
      basic_ = b0;
    }
    iterations_ = 0;
  }
  if (!warmed) {
    bool any_art = false;
    for (const auto& row : rows_) any_art |= row.artificial >= 0;
    if (any_art) {
      iterate(z1_, true);
      if (z1_[cols_] > 1e-9 * (1.0 + std::abs(z1_[cols_]))) return extract(LpStatus::infeasible);
      // Drive zero-level artificials out of the basis where possible.
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (!is_artificial_[static_cast<std::size_t>(basic_[r])]) continue;
        int col = -1;
        double best = 1e-7;
        for (std::size_t c = 0; c < cols_; ++c) {
          if (is_artificial_[c]) continue;
          if (std::abs(at(r, c)) > best) {
            best = std::abs(at(r, c));
            col = static_cast<int>(c);
          }
        }
        if (col >= 0) {
          at(r, cols_) = 0.0;
          pivot(r, static_cast<std::size_t>(col));
        }
      }
    }
  }
  degenerate_run_ = 0;
  bland_ = false;
  if (!iterate(z2_, false)) return extract(LpStatus::unbounded);
  return extract(LpStatus::optimal);
}

LpSolution Tableau::extract(LpStatus status) {
  LpSolution sol;
  sol.status = status;
  sol.iterations = iterations_;
  sol.primal.assign(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) sol.primal[j] = lp_.lower[j];
  if (status != LpStatus::optimal) return sol;

  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const int v = var_of_[static_cast<std::size_t>(basic_[r])];
    if (v >= 0) {
      const std::size_t j = static_cast<std::size_t>(v);
      sol.primal[j] = std::clamp(lp_.lower[j] + std::max(0.0, rhs(r)), lp_.lower[j], lp_.upper[j]);
    }
  }
  sol.duals.assign(lp_.constraints.size(), 0.0);
  for (const auto& row : rows_) {
    if (row.user_index < 0) continue;
    const int col = row.relation == Relation::le ? row.slack : row.artificial;
    sol.duals[static_cast<std::size_t>(row.user_index)] = -row.flip * z2_[static_cast<std::size_t>(col)];
  }
  sol.reduced_costs.assign(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    double d = lp_.objective[j];
    for (std::size_t k = 0; k < lp_.constraints.size(); ++k) d -= sol.duals[k] * lp_.constraints[k].coeffs[j];
    sol.reduced_costs[j] = d;
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n_; ++j) sol.objective += lp_.objective[j] * sol.primal[j];
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const int c = basic_[r];
    LpBasis::Entry e{LpBasis::Kind::structural, 0};
    const auto& owner = [&]() -> const Row* {
      for (const auto& row : rows_)
        if (row.slack == c || row.artificial == c) return &row;
      return nullptr;
    }();
    if (var_of_[static_cast<std::size_t>(c)] >= 0) {
      e = {LpBasis::Kind::structural, var_of_[static_cast<std::size_t>(c)]};
    } else if (owner && owner->user_index >= 0) {
      e = {owner->slack == c ? LpBasis::Kind::slack : LpBasis::Kind::artificial, owner->user_index};
    } else if (owner) {
      e = {LpBasis::Kind::bound_slack, owner->bound_var};
    }
    sol.basis.entries.push_back(e);
  }
  return sol;
}

}  // namespace

double CertificateResiduals::worst() const { return std::max({primal, dual, slackness, duality_gap}); }

CertificateResiduals certificate_residuals(const LinearProgram& lp, const LpSolution& sol) {
  CertificateResiduals res;
  const std::size_t n = lp.objective.size();
  double primal_obj = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = sol.primal[j];
    primal_obj += lp.objective[j] * x;
    res.primal = std::max({res.primal, lp.lower[j] - x, x - lp.upper[j]});
  }
  res.dual_objective = 0.0;
  for (std::size_t k = 0; k < lp.constraints.size(); ++k) {
    const auto& c = lp.constraints[k];
    double ax = 0.0;
    for (std::size_t j = 0; j < n; ++j) ax += c.coeffs[j] * sol.primal[j];
    const double slack = c.rhs - ax;
    const double y = sol.duals[k];
    switch (c.relation) {
      case Relation::le:
        res.primal = std::max(res.primal, -slack);
        res.dual = std::max(res.dual, -y);
        res.slackness = std::max(res.slackness, std::abs(y * slack));
        break;
      case Relation::ge:
        res.primal = std::max(res.primal, slack);
        res.dual = std::max(res.dual, y);
        res.slackness = std::max(res.slackness, std::abs(y * slack));
        break;
      case Relation::eq:
        res.primal = std::max(res.primal, std::abs(slack));
        break;
    }
    res.dual_objective += y * c.rhs;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double d = lp.objective[j];
    for (std::size_t k = 0; k < lp.constraints.size(); ++k) d -= sol.duals[k] * lp.constraints[k].coeffs[j];
    if (d > 0.0) {
      if (std::isinf(lp.upper[j])) {
        res.dual = std::max(res.dual, d);
        res.dual_objective += d * lp.lower[j];
      } else {
        res.slackness = std::max(res.slackness, d * (lp.upper[j] - sol.primal[j]));
        res.dual_objective += d * lp.upper[j];
      }
    } else {
      res.slackness = std::max(res.slackness, -d * (sol.primal[j] - lp.lower[j]));
      res.dual_objective += d * lp.lower[j];
    }
  }
  res.duality_gap = std::abs(primal_obj - res.dual_objective);
  return res;
}

LpSolution simplex_solve(const LinearProgram& lp, const LpBasis* warm_start) {
  Tableau tab(lp);
  LpSolution sol = tab.solve(warm_start);
  if (sol.status == LpStatus::optimal) {
    double scale = 1.0 + std::abs(sol.objective);
    for (const auto& c : lp.constraints) scale = std::max(scale, std::abs(c.rhs));
    for (double c : lp.objective) scale = std::max(scale, std::abs(c));
    const auto res = certificate_residuals(lp, sol);
    if (res.worst() > 1e-7 * scale)
      throw NumericalFailure("LP certificate residual " + std::to_string(res.worst()) + " exceeds tolerance");
  }
  return sol;
}

nlohmann::json LinearProgram::to_json() const {
  nlohmann::json j;
  j["objective"] = objective;
  j["lower"] = nlohmann::json::array();
  j["upper"] = nlohmann::json::array();
  for (std::size_t i = 0; i < lower.size(); ++i) {
    j["lower"].push_back(bound_json(lower[i]));
    j["upper"].push_back(bound_json(upper[i]));
  }
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : constraints)
    j["constraints"].push_back({{"coeffs", c.coeffs}, {"relation", relation_name(c.relation)}, {"rhs", c.rhs}});
  return j;
}

}  // namespace uip::optim
