#pragma once

#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rlds {

using Rng = std::mt19937_64;

/// One (merged brake/throttle, steering) pair.
struct Action {
  double u = 0.0;
  double s = 0.0;
  friend bool operator==(const Action&, const Action&) = default;
};

/// Inclusive, equally spaced value grids for both command channels.
struct ActionGrids {
  Eigen::VectorXd throttle;
  Eigen::VectorXd steering;

  static ActionGrids make(int throttle_count = 20, double throttle_lo = -0.5,
                          double throttle_hi = 0.5, int steering_count = 100,
                          double steering_lo = -0.8, double steering_hi = 0.8);
  std::size_t size() const { return static_cast<std::size_t>(throttle.size() * steering.size()); }
};

/// `count` values from lo to hi inclusive; both endpoints exact.
Eigen::VectorXd linspace(int count, double lo, double hi);

enum class DfsmState { w0, w1, w2 };
enum class DfsmInput { sigma0, sigma1 };

/// Contiguous run of rays, 1-based inclusive indices.
struct Mode {
  int start = 1;
  int end = 1;
  int center = 1;
  friend bool operator==(const Mode&, const Mode&) = default;
};

struct NavState {
  DfsmState w = DfsmState::w0;
  std::optional<int> prev_center;
};

struct AllowedActions {
  int block = 0;  ///< 0-based steering block
  std::vector<Action> pairs;
};

struct NavParams {
  double alpha = 12.0;
  double open_margin = 0.1;
  int min_run = 3;
  int regions = 5;
};

std::vector<Mode> extract_modes(std::span<const double> d, double alpha,
                                double open_margin = 0.1, int min_run = 3);

DfsmInput dfsm_input(const std::vector<Mode>& modes);

/// Transition table:
///   (w0, s0) -> w0   (w0, s1) -> w1
///   (w1, s0) -> w0   (w1, s1) -> w2
///   (w2, s0) -> w0   (w2, s1) -> w2
DfsmState dfsm_step(DfsmState w, DfsmInput sigma);

/// Picks the mode for state `w` and records its center in `nav`.
Mode select_mode(DfsmState w, const std::vector<Mode>& modes, NavState& nav, Rng& rng);

/// 1-based region holding ray `center`.
int region_of(int center, int ray_count, int regions);

std::vector<double> steering_subset(const Mode& mode, const ActionGrids& grids, int ray_count,
                                    int regions);

std::pair<AllowedActions, NavState> allowed_actions(std::span<const double> d, NavState nav,
                                                    Rng& rng, const ActionGrids& grids,
                                                    const NavParams& params = {});

/// Owns the DFSM state and mode-selection RNG for one agent.
class Navigator {
 public:
  Navigator(ActionGrids grids, NavParams params, std::uint64_t seed)
      : grids_(std::move(grids)), params_(params), rng_(seed) {}

  AllowedActions next(std::span<const double> d);
  void reset() { state_ = NavState{}; }

  const NavState& state() const { return state_; }
  const ActionGrids& grids() const { return grids_; }

 private:
  ActionGrids grids_;
  NavParams params_;
  Rng rng_;
  NavState state_;
};

}  // namespace rlds
