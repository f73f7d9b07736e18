#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "uip/model.hpp"

namespace uip::optim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { le, eq, ge };

struct Constraint {
  std::vector<double> coeffs;
  Relation relation = Relation::le;
  double rhs = 0.0;
};

/// maximize objective . x subject to constraints and lower <= x <= upper (lower finite).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t variables() const { return objective.size(); }
  /// Adds a variable with bounds [0, +inf) unless given; existing constraints get a zero coefficient.
  void add_variable(double cost, double lo = 0.0, double hi = kInf);
  nlohmann::json to_json() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

/// Basis of a previous solve, reusable as a warm start when variables were appended.
struct LpBasis {
  enum class Kind { structural, slack, artificial, bound_slack };
  struct Entry {
    Kind kind;
    int index;  ///< variable index, or constraint index for slack/artificial
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> primal;
  std::vector<double> duals;          ///< one per constraint (max form: >= 0 for <=, <= 0 for >=)
  std::vector<double> reduced_costs;  ///< c_j - sum_k y_k a_kj; the bound duals
  double objective = 0.0;
  int iterations = 0;
  LpBasis basis;
};

struct CertificateResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double slackness = 0.0;
  double duality_gap = 0.0;
  double dual_objective = 0.0;
  double worst() const;
};

CertificateResiduals certificate_residuals(const LinearProgram& lp, const LpSolution& sol);

/// Dense two-phase tableau simplex. Throws NumericalFailure when the final
/// certificate misses 1e-7 (scaled by the problem magnitude).
LpSolution simplex_solve(const LinearProgram& lp, const LpBasis* warm_start = nullptr);

struct SetPartitionMilp {
  std::vector<model::BundleOption> options;
  std::vector<double> rewards;
  std::size_t item_count = 0;
  int max_bundles = 0;
  std::vector<std::vector<int>> cuts;  ///< no-good cuts: sum over listed options <= size - 1

  nlohmann::json to_json() const;
};

struct MilpSolution {
  std::vector<int> assignment;  ///< 0/1 per option
  double objective = 0.0;
  std::size_t nodes = 0;

  std::vector<int> chosen() const;
};

/// Best-first LP-based branch and bound. Throws Infeasible when no partition exists.
MilpSolution bnb_solve(const SetPartitionMilp& milp);

/// Up to n distinct partitions in non-increasing objective order (no-good cuts between solves).
std::vector<MilpSolution> enumerate_top_solutions(SetPartitionMilp milp, std::size_t n);

}  // namespace uip::optim
