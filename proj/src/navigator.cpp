#include "rlds/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rlds {

Eigen::VectorXd linspace(int count, double lo, double hi) {
  if (count < 2) throw std::invalid_argument("grid needs at least 2 values");
  Eigen::VectorXd v(count);
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) v[i] = lo + i * step;
  v[count - 1] = hi;
  return v;
}

ActionGrids ActionGrids::make(int throttle_count, double throttle_lo, double throttle_hi,
                              int steering_count, double steering_lo, double steering_hi) {
  if (!(throttle_lo < throttle_hi) || !(steering_lo < steering_hi))
    throw std::invalid_argument("grid bounds must be strictly increasing");
  return {linspace(throttle_count, throttle_lo, throttle_hi),
          linspace(steering_count, steering_lo, steering_hi)};
}

std::vector<Mode> extract_modes(std::span<const double> d, double alpha, double open_margin,
                                int min_run) {
  const int n = static_cast<int>(d.size());
  if (n == 0) throw std::invalid_argument("empty circogram");

  // Maximal runs of rays satisfying `pred`, 1-based.
  auto runs = [&](auto pred) {
    std::vector<Mode> out;
    int i = 0;
    while (i < n) {
      if (!pred(d[static_cast<std::size_t>(i)])) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < n && pred(d[static_cast<std::size_t>(j + 1)])) ++j;
      out.push_back({i + 1, j + 1, (i + 1 + j + 1) / 2});
      i = j + 1;
    }
    return out;
  };

  std::vector<Mode> modes;
  for (const Mode& m : runs([&](double x) { return x >= alpha - open_margin; }))
    if (m.end - m.start + 1 >= min_run) modes.push_back(m);
  if (!modes.empty()) return modes;

  const double longest = *std::max_element(d.begin(), d.end());
  return {runs([&](double x) { return std::abs(x - longest) <= 1e-9; }).front()};
}

DfsmInput dfsm_input(const std::vector<Mode>& modes) {
  if (modes.empty()) throw std::invalid_argument("dfsm input needs at least one mode");
  return modes.size() == 1 ? DfsmInput::sigma0 : DfsmInput::sigma1;
}

DfsmState dfsm_step(DfsmState w, DfsmInput sigma) {
  if (sigma == DfsmInput::sigma0) return DfsmState::w0;
  return w == DfsmState::w0 ? DfsmState::w1 : DfsmState::w2;
}

Mode select_mode(DfsmState w, const std::vector<Mode>& modes, NavState& nav, Rng& rng) {
  if (modes.empty()) throw std::invalid_argument("select_mode needs at least one mode");
  Mode chosen;
  switch (w) {
    case DfsmState::w0:
      if (modes.size() != 1) throw std::logic_error("w0 requires exactly one eligible mode");
      chosen = modes.front();
      break;
    case DfsmState::w1: {
      std::uniform_int_distribution<std::size_t> pick(0, modes.size() - 1);
      chosen = modes[pick(rng)];
      break;
    }
    case DfsmState::w2: {
      if (!nav.prev_center) throw std::logic_error("w2 reached without a previous mode");
      const int prev = *nav.prev_center;
      // Modes are ordered by start index, so min_element keeps the lowest
      // start on ties.
      chosen = *std::min_element(modes.begin(), modes.end(), [&](const Mode& a, const Mode& b) {
        return std::abs(a.center - prev) < std::abs(b.center - prev);
      });
      break;
    }
  }
  nav.w = w;
  nav.prev_center = chosen.center;
  return chosen;
}

int region_of(int center, int ray_count, int regions) {
  const int per_region = ray_count / regions;
  return 1 + (center - 1) / per_region;
}

std::vector<double> steering_subset(const Mode& mode, const ActionGrids& grids, int ray_count,
                                    int regions) {
  if (ray_count % regions != 0 || grids.steering.size() % regions != 0)
    throw std::invalid_argument("rays and steering grid must split evenly into regions");
  const int r = region_of(mode.center, ray_count, regions);
  const auto block = grids.steering.size() / regions;
  auto seg = grids.steering.segment((r - 1) * block, block);
  return {seg.begin(), seg.end()};
}

std::pair<AllowedActions, NavState> allowed_actions(std::span<const double> d, NavState nav,
                                                    Rng& rng, const ActionGrids& grids,
                                                    const NavParams& params) {
  const auto modes = extract_modes(d, params.alpha, params.open_margin, params.min_run);
  const DfsmState w = dfsm_step(nav.w, dfsm_input(modes));
  const Mode mode = select_mode(w, modes, nav, rng);
  const int ray_count = static_cast<int>(d.size());
  const auto steering = steering_subset(mode, grids, ray_count, params.regions);

  AllowedActions out;
  out.block = region_of(mode.center, ray_count, params.regions) - 1;
  out.pairs.reserve(static_cast<std::size_t>(grids.throttle.size()) * steering.size());
  for (double u : grids.throttle)
    for (double s : steering) out.pairs.push_back({u, s});
  return {std::move(out), nav};
}

AllowedActions Navigator::next(std::span<const double> d) {
  auto [allowed, nav] = allowed_actions(d, state_, rng_, grids_, params_);
  state_ = nav;
  return std::move(allowed);
}

}  // namespace rlds
