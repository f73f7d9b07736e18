#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "support.hpp"
#include "uip/errors.hpp"
#include "uip/model.hpp"
#include "uip/optim.hpp"
#include "uip/rng.hpp"

using namespace uip;
using namespace uip::optim;

using support::brute_force;
using support::enumerate_lp;
using support::random_lp;
using support::random_milp;

TEST_CASE("trivial LPs") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 1.0);
  auto s = simplex_solve(lp);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.primal[0] == doctest::Approx(1.0));

  LinearProgram unb;
  unb.add_variable(1.0);
  CHECK(simplex_solve(unb).status == LpStatus::unbounded);

  LinearProgram inf;
  inf.add_variable(1.0);
  inf.constraints.push_back({{1.0}, Relation::ge, 2.0});
  inf.constraints.push_back({{1.0}, Relation::le, 1.0});
  CHECK(simplex_solve(inf).status == LpStatus::infeasible);

  // max x + y, x + 2y <= 4, 3x + y <= 6: optimum (1.6, 1.2) with duals (0.4, 0.2).
  LinearProgram two;
  two.add_variable(1.0);
  two.add_variable(1.0);
  two.constraints.push_back({{1.0, 2.0}, Relation::le, 4.0});
  two.constraints.push_back({{3.0, 1.0}, Relation::le, 6.0});
  auto t = simplex_solve(two);
  CHECK(t.objective == doctest::Approx(2.8));
  CHECK(t.primal[0] == doctest::Approx(1.6));
  CHECK(t.duals[0] == doctest::Approx(0.4));
  CHECK(t.duals[1] == doctest::Approx(0.2));
  CHECK(certificate_residuals(two, t).worst() < 1e-12);
}

TEST_CASE("simplex agrees with vertex enumeration and certifies optimality") {
  Rng rng(101);
  int optimal = 0, infeasible = 0;
  for (int k = 0; k < 200; ++k) {
    const auto lp = random_lp(rng);
    const double want = enumerate_lp(lp);
    const auto sol = simplex_solve(lp);
    if (!std::isfinite(want)) {
      CHECK(sol.status == LpStatus::infeasible);
      ++infeasible;
      continue;
    }
    REQUIRE(sol.status == LpStatus::optimal);
    ++optimal;
    CHECK(std::abs(sol.objective - want) <= 1e-9 * std::max(1.0, std::abs(want)));
    const auto res = certificate_residuals(lp, sol);
    CHECK(res.primal <= 1e-9);
    CHECK(res.dual <= 1e-9);
    CHECK(res.slackness <= 1e-9);
    CHECK(res.duality_gap <= 1e-9);
  }
  CHECK(optimal > 50);
  CHECK(infeasible > 0);
}

TEST_CASE("warm start after appending a column") {
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    auto lp = random_lp(rng);
    const auto first = simplex_solve(lp);
    if (first.status != LpStatus::optimal) continue;
    lp.add_variable(rng.uniform(0.0, 3.0), 0.0, 1.0);
    for (auto& c : lp.constraints) c.coeffs.back() = rng.uniform(-1.0, 1.0);
    const auto cold = simplex_solve(lp);
    const auto warm = simplex_solve(lp, &first.basis);
    REQUIRE(cold.status == warm.status);
    if (cold.status == LpStatus::optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
      CHECK(certificate_residuals(lp, warm).worst() <= 1e-9);
    }
  }
}

TEST_CASE("degenerate LP terminates") {
  // Many redundant constraints through the optimal vertex.
  LinearProgram lp;
  for (int j = 0; j < 3; ++j) lp.add_variable(1.0);
  for (int r = 0; r < 12; ++r) lp.constraints.push_back({{1.0, 1.0, 1.0}, Relation::le, 1.0});
  lp.constraints.push_back({{1.0, 0.0, 0.0}, Relation::le, 0.0});
  const auto s = simplex_solve(lp);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("branch and bound matches exhaustive partitions") {
  Rng rng(103);
  for (int k = 0; k < 30; ++k) {
    const std::size_t items = 3 + k % 4;
    const auto milp = random_milp(rng, items, 2 + k % 2, 1 + k % 3);
    const auto want = brute_force(milp);
    const auto got = bnb_solve(milp);
    CHECK(got.objective == doctest::Approx(want.best).epsilon(1e-9));
    // The assignment is a valid partition with the reported objective.
    std::vector<int> cover(items, 0);
    double v = 0.0;
    int bundles = 0;
    for (int idx : got.chosen()) {
      const auto& o = milp.options[static_cast<std::size_t>(idx)];
      for (int i : o.items()) ++cover[static_cast<std::size_t>(i)];
      v += milp.rewards[static_cast<std::size_t>(idx)];
      bundles += o.is_bundle() ? 1 : 0;
    }
    for (int c : cover) CHECK(c == 1);
    CHECK(bundles <= milp.max_bundles);
    CHECK(v == doctest::Approx(got.objective).epsilon(1e-12));
  }
}

TEST_CASE("branch and bound prefers fewer bundles on ties") {
  SetPartitionMilp milp;
  milp.item_count = 2;
  milp.max_bundles = 1;
  milp.options = model::enumerate_options(2, 2);
  milp.rewards = {1.0, 1.0, 2.0, 0.0};
  const auto s = bnb_solve(milp);
  CHECK(s.chosen() == std::vector<int>{0, 1});
}

TEST_CASE("branch and bound infeasibility") {
  SetPartitionMilp milp;
  milp.item_count = 3;
  milp.max_bundles = 1;
  milp.options = {model::BundleOption{0}, model::BundleOption{1}};
  milp.rewards = {1.0, 1.0};
  CHECK_THROWS_AS(bnb_solve(milp), Infeasible);
}

TEST_CASE("top-N enumeration returns distinct partitions in order") {
  Rng rng(107);
  for (int k = 0; k < 10; ++k) {
    const auto milp = random_milp(rng, 4, 2, 2);
    const auto want = brute_force(milp);
    const auto top = enumerate_top_solutions(milp, 6);
    REQUIRE(top.size() == std::min<std::size_t>(6, want.all.size()));
    std::set<std::vector<int>> seen;
    for (std::size_t r = 0; r < top.size(); ++r) {
      CHECK(top[r].objective == doctest::Approx(want.all[r]).epsilon(1e-9));
      CHECK(seen.insert(top[r].chosen()).second);
      if (r > 0) CHECK(top[r].objective <= top[r - 1].objective + 1e-9);
    }
  }
  // Asking for more than exist returns all of them.
  SetPartitionMilp tiny;
  tiny.item_count = 2;
  tiny.max_bundles = 1;
  tiny.options = model::enumerate_options(2, 2);
  tiny.rewards = {1.0, 1.0, 1.5, 1.2};
  CHECK(enumerate_top_solutions(tiny, 10).size() == 3);
}

TEST_CASE("serialization") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 2.0);
  lp.constraints.push_back({{1.0}, Relation::ge, 0.5});
  const auto j = lp.to_json();
  CHECK(j["objective"].size() == 1);
  SetPartitionMilp milp;
  milp.item_count = 1;
  milp.options = {model::BundleOption{0}};
  milp.rewards = {1.0};
  CHECK(milp.to_json()["options"][0] == nlohmann::json::array({0}));
}
