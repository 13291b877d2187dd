#include "rlds/navigator.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

namespace {

using rlds::DfsmInput;
using rlds::DfsmState;
using rlds::Mode;

std::vector<double> circ(std::initializer_list<std::pair<int, double>> runs) {
  // (count, value) pairs laid out left to right.
  std::vector<double> d;
  for (auto [n, v] : runs) d.insert(d.end(), static_cast<std::size_t>(n), v);
  return d;
}

TEST(Grids, Cardinalities) {
  const auto g = rlds::ActionGrids::make();
  EXPECT_EQ(g.throttle.size(), 20);
  EXPECT_EQ(g.steering.size(), 100);
  EXPECT_EQ(g.size(), 2000u);
  EXPECT_EQ(g.throttle[0], -0.5);
  EXPECT_EQ(g.throttle[19], 0.5);
  EXPECT_EQ(g.steering[0], -0.8);
  EXPECT_EQ(g.steering[99], 0.8);
  for (int i = 1; i < 20; ++i) EXPECT_GT(g.throttle[i], g.throttle[i - 1]);
  for (int i = 1; i < 100; ++i) EXPECT_GT(g.steering[i], g.steering[i - 1]);
}

TEST(ExtractModes, Examples) {
  EXPECT_EQ(rlds::extract_modes(circ({{25, 12.0}}), 12.0), (std::vector<Mode>{{1, 25, 13}}));
  EXPECT_EQ(rlds::extract_modes(circ({{5, 3.0}, {20, 12.0}}), 12.0),
            (std::vector<Mode>{{6, 25, 15}}));
  EXPECT_EQ(rlds::extract_modes(circ({{10, 12.0}, {5, 4.0}, {10, 12.0}}), 12.0),
            (std::vector<Mode>{{1, 10, 5}, {16, 25, 20}}));
}

TEST(ExtractModes, OpenThresholdAndMinRun) {
  // 11.9 is open, 11.89 is not; runs shorter than 3 are ignored.
  EXPECT_EQ(rlds::extract_modes(circ({{3, 11.9}, {22, 2.0}}), 12.0),
            (std::vector<Mode>{{1, 3, 2}}));
  EXPECT_EQ(rlds::extract_modes(circ({{2, 12.0}, {1, 2.0}, {3, 12.0}, {19, 2.0}}), 12.0),
            (std::vector<Mode>{{4, 6, 5}}));
  const auto m = rlds::extract_modes(circ({{3, 11.89}, {22, 2.0}}), 12.0);
  EXPECT_EQ(m, (std::vector<Mode>{{1, 3, 2}}));  // via the fallback
}

TEST(ExtractModes, FallbackLowestArgmaxRun) {
  const auto d = circ({{4, 3.0}, {2, 7.0}, {5, 1.0}, {3, 7.0}, {11, 2.0}});
  EXPECT_EQ(rlds::extract_modes(d, 12.0), (std::vector<Mode>{{5, 6, 5}}));
}

TEST(ExtractModes, RandomInvariants) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  std::bernoulli_distribution open(0.5);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> d(25);
    for (auto& x : d) x = open(rng) ? 12.0 : u(rng);
    const auto modes = rlds::extract_modes(d, 12.0);
    ASSERT_FALSE(modes.empty());
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto& m = modes[i];
      EXPECT_GE(m.start, 1);
      EXPECT_LE(m.end, 25);
      EXPECT_LE(m.start, m.center);
      EXPECT_LE(m.center, m.end);
      EXPECT_EQ(m.center, (m.start + m.end) / 2);
      if (i > 0) { EXPECT_GT(m.start, modes[i - 1].end); }
    }
  }
}

TEST(Dfsm, Input) {
  EXPECT_EQ(rlds::dfsm_input({{1, 25, 13}}), DfsmInput::sigma0);
  EXPECT_EQ(rlds::dfsm_input({{1, 5, 3}, {10, 15, 12}}), DfsmInput::sigma1);
  EXPECT_EQ(rlds::dfsm_input({{1, 5, 3}, {10, 15, 12}, {20, 25, 22}}), DfsmInput::sigma1);
}

TEST(Dfsm, ExhaustiveTable) {
  using S = DfsmState;
  using I = DfsmInput;
  const std::tuple<S, I, S> table[] = {
      {S::w0, I::sigma0, S::w0}, {S::w0, I::sigma1, S::w1}, {S::w1, I::sigma0, S::w0},
      {S::w1, I::sigma1, S::w2}, {S::w2, I::sigma0, S::w0}, {S::w2, I::sigma1, S::w2},
  };
  for (auto [w, s, next] : table) EXPECT_EQ(rlds::dfsm_step(w, s), next);
}

TEST(SelectMode, Rules) {
  rlds::Rng rng(1);
  rlds::NavState nav;
  EXPECT_EQ(rlds::select_mode(DfsmState::w0, {{6, 25, 15}}, nav, rng), (Mode{6, 25, 15}));
  EXPECT_EQ(nav.prev_center, 15);

  nav.prev_center = 5;
  EXPECT_EQ(rlds::select_mode(DfsmState::w2, {{3, 7, 5}, {18, 22, 20}}, nav, rng).center, 5);

  nav.prev_center = 12;
  EXPECT_EQ(rlds::select_mode(DfsmState::w2, {{8, 12, 10}, {12, 16, 14}}, nav, rng).start, 8);
  EXPECT_EQ(nav.prev_center, 10);

  rlds::NavState empty;
  EXPECT_THROW(rlds::select_mode(DfsmState::w2, {{1, 3, 2}, {5, 9, 7}}, empty, rng),
               std::logic_error);
}

TEST(SelectMode, W1IsUniform) {
  rlds::Rng rng(2);
  const std::vector<Mode> modes{{1, 3, 2}, {8, 12, 10}, {20, 25, 22}};
  std::map<int, int> counts;
  for (int i = 0; i < 30000; ++i) {
    rlds::NavState nav;
    ++counts[rlds::select_mode(DfsmState::w1, modes, nav, rng).center];
  }
  for (auto [c, n] : counts) EXPECT_NEAR(n / 30000.0, 1.0 / 3.0, 0.015) << c;
}

TEST(SteeringSubset, Blocks) {
  const auto g = rlds::ActionGrids::make();
  const auto mid = rlds::steering_subset({6, 25, 15}, g, 25, 5);
  ASSERT_EQ(mid.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(mid[i], -mid[19 - i], 1e-12);
  const auto left = rlds::steering_subset({1, 1, 1}, g, 25, 5);
  EXPECT_EQ(left.front(), -0.8);
  const auto right = rlds::steering_subset({25, 25, 25}, g, 25, 5);
  EXPECT_EQ(right.back(), 0.8);
  for (int c = 1; c <= 25; ++c) EXPECT_EQ(rlds::region_of(c, 25, 5), 1 + (c - 1) / 5);
}

TEST(AllowedActions, FourHundredPairsFromOneBlock) {
  const auto g = rlds::ActionGrids::make();
  rlds::Rng rng(5);
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 12.0);
  std::bernoulli_distribution open(0.6);
  rlds::NavState nav;
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> d(25);
    for (auto& x : d) x = open(gen) ? 12.0 : u(gen);
    auto [allowed, next] = rlds::allowed_actions(d, nav, rng, g);
    nav = next;
    ASSERT_EQ(allowed.pairs.size(), 400u);
    std::set<double> steer;
    for (const auto& p : allowed.pairs) steer.insert(p.s);
    EXPECT_EQ(steer.size(), 20u);
    EXPECT_EQ(*steer.begin(), g.steering[allowed.block * 20]);
    EXPECT_EQ(*steer.rbegin(), g.steering[allowed.block * 20 + 19]);
    if (nav.w != DfsmState::w0) { EXPECT_TRUE(nav.prev_center.has_value()); }
  }
}

TEST(AllowedActions, StaysInW2WhileAmbiguous) {
  const auto g = rlds::ActionGrids::make();
  rlds::Rng rng(5);
  const auto two = circ({{10, 12.0}, {5, 4.0}, {10, 12.0}});
  rlds::NavState nav;
  nav = rlds::allowed_actions(two, nav, rng, g).second;
  EXPECT_EQ(nav.w, DfsmState::w1);
  const int committed = *nav.prev_center;
  for (int i = 0; i < 10; ++i) {
    nav = rlds::allowed_actions(two, nav, rng, g).second;
    EXPECT_EQ(nav.w, DfsmState::w2);
    EXPECT_EQ(*nav.prev_center, committed);
  }
}

TEST(AllowedActions, AlternatingInputs) {
  const auto g = rlds::ActionGrids::make();
  rlds::Rng rng(5);
  const auto one = circ({{25, 12.0}});
  const auto two = circ({{10, 12.0}, {5, 4.0}, {10, 12.0}});
  rlds::NavState nav;
  for (int i = 0; i < 6; ++i) {
    nav = rlds::allowed_actions(two, nav, rng, g).second;
    EXPECT_EQ(nav.w, DfsmState::w1);
    nav = rlds::allowed_actions(one, nav, rng, g).second;
    EXPECT_EQ(nav.w, DfsmState::w0);
  }
}

TEST(AllowedActions, MirrorSymmetryForSingleOddModes) {
  const auto g = rlds::ActionGrids::make();
  rlds::Rng rng(0);
  for (int start = 1; start <= 25; ++start)
    for (int end = start + 2; end <= 25; end += 2) {
      std::vector<double> d(25, 3.0);
      for (int i = start; i <= end; ++i) d[static_cast<std::size_t>(i - 1)] = 12.0;
      std::vector<double> m(d.rbegin(), d.rend());
      const auto a = rlds::allowed_actions(d, {}, rng, g).first;
      const auto b = rlds::allowed_actions(m, {}, rng, g).first;
      EXPECT_EQ(a.block, 4 - b.block);
      for (std::size_t i = 0; i < 20; ++i)
        EXPECT_NEAR(a.pairs[i].s, -b.pairs[19 - i].s, 1e-12);
    }
}

TEST(Navigator, Reproducible) {
  const auto g = rlds::ActionGrids::make();
  rlds::Navigator a(g, {}, 77), b(g, {}, 77);
  std::mt19937_64 gen(1);
  std::bernoulli_distribution open(0.5);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> d(25);
    for (auto& x : d) x = open(gen) ? 12.0 : 5.0;
    EXPECT_EQ(a.next(d).block, b.next(d).block);
  }
}

}  // namespace
