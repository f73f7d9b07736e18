#include <algorithm>
#include <cmath>
#include <queue>

#include "uip/errors.hpp"
#include "uip/optim.hpp"

namespace uip::optim {

std::vector<int> MilpSolution::chosen() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i]) out.push_back(static_cast<int>(i));
  return out;
}

nlohmann::json SetPartitionMilp::to_json() const {
  nlohmann::json j;
  j["item_count"] = item_count;
  j["max_bundles"] = max_bundles;
  j["options"] = nlohmann::json::array();
  for (const auto& o : options) j["options"].push_back(o.items());
  j["rewards"] = rewards;
  j["cuts"] = cuts;
  return j;
}

namespace {

constexpr double kIntegralityTol = 1e-6;

enum class Fix : char { free, zero, one };

struct Node {
  double bound;
  std::size_t id;
  std::vector<Fix> fix;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution bnb_solve(const SetPartitionMilp& milp) {
  const std::size_t n = milp.options.size();
  if (milp.rewards.size() != n) throw DimensionMismatch("one reward per option required");
  if (milp.item_count > 64) throw DomainError("set partitioning supports at most 64 items");

  std::vector<char> covered(milp.item_count, 0);
  for (const auto& o : milp.options)
    for (int i : o.items()) {
      if (static_cast<std::size_t>(i) >= milp.item_count) throw DomainError("option refers to a missing item");
      covered[static_cast<std::size_t>(i)] = 1;
    }
  for (std::size_t i = 0; i < milp.item_count; ++i)
    if (!covered[i]) throw Infeasible("item " + std::to_string(i) + " is not covered by any option");

  double scale = 1.0;
  for (double r : milp.rewards) scale = std::max(scale, std::abs(r));
  // Bundles pay a tiny penalty so exact ties resolve toward fewer bundles.
  const double eta = 1e-9 * scale;
  const double prune_tol = 1e-11 * scale;

  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i)
    lp.add_variable(milp.rewards[i] - (milp.options[i].is_bundle() ? eta : 0.0), 0.0, kInf);
  for (std::size_t item = 0; item < milp.item_count; ++item) {
    Constraint c{std::vector<double>(n, 0.0), Relation::eq, 1.0};
    for (std::size_t i = 0; i < n; ++i)
      if (milp.options[i].contains(static_cast<int>(item))) c.coeffs[i] = 1.0;
    lp.constraints.push_back(std::move(c));
  }
  {
    Constraint c{std::vector<double>(n, 0.0), Relation::le, static_cast<double>(milp.max_bundles)};
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      if (milp.options[i].is_bundle()) {
        c.coeffs[i] = 1.0;
        any = true;
      }
    if (any) lp.constraints.push_back(std::move(c));
  }
  for (const auto& cut : milp.cuts) {
    Constraint c{std::vector<double>(n, 0.0), Relation::le, static_cast<double>(cut.size()) - 1.0};
    for (int i : cut) c.coeffs[static_cast<std::size_t>(i)] = 1.0;
    lp.constraints.push_back(std::move(c));
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::size_t created = 0;
  open.push(Node{kInf, created++, std::vector<Fix>(n, Fix::free)});

  bool have = false;
  double incumbent = -kInf;
  std::vector<int> best;
  std::size_t explored = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (have && node.bound <= incumbent + prune_tol) break;
    ++explored;
    for (std::size_t i = 0; i < n; ++i) {
      lp.lower[i] = node.fix[i] == Fix::one ? 1.0 : 0.0;
      lp.upper[i] = node.fix[i] == Fix::free ? kInf : lp.lower[i];
    }
    const LpSolution sol = simplex_solve(lp);
    if (sol.status != LpStatus::optimal) continue;
    if (have && sol.objective <= incumbent + prune_tol) continue;

    int branch = -1;
    double worst = kIntegralityTol;
    for (std::size_t i = 0; i < n; ++i) {
      const double frac = std::abs(sol.primal[i] - std::round(sol.primal[i]));
      if (frac > worst + 1e-12) {
        worst = frac;
        branch = static_cast<int>(i);
      }
    }
    if (branch < 0) {
      have = true;
      incumbent = sol.objective;
      best.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) best[i] = sol.primal[i] > 0.5 ? 1 : 0;
      continue;
    }
    Node up{sol.objective, created++, node.fix};
    up.fix[static_cast<std::size_t>(branch)] = Fix::one;
    Node down{sol.objective, created++, std::move(node.fix)};
    down.fix[static_cast<std::size_t>(branch)] = Fix::zero;
    open.push(std::move(up));
    open.push(std::move(down));
  }
  if (!have) throw Infeasible("no feasible partition");

  MilpSolution out;
  out.assignment = std::move(best);
  out.nodes = explored;
  for (std::size_t i = 0; i < n; ++i)
    if (out.assignment[i]) out.objective += milp.rewards[i];
  return out;
}

std::vector<MilpSolution> enumerate_top_solutions(SetPartitionMilp milp, std::size_t n) {
  if (n == 0) throw DomainError("enumerate_top_solutions needs n >= 1");
  std::vector<MilpSolution> out;
  while (out.size() < n) {
    try {
      out.push_back(bnb_solve(milp));
    } catch (const Infeasible&) {
      break;
    }
    milp.cuts.push_back(out.back().chosen());
  }
  return out;
}

}  // namespace uip::optim
