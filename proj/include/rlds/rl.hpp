#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rlds/navigator.hpp"
#include "rlds/neural.hpp"
#include "rlds/simulator.hpp"

namespace rlds {

/// Independent seed for one component stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream);

// --- Memorizer / state generator -------------------------------------------

/// FIFO histories of v, v' and the circogram. Only decision-tick measurements
/// are ever enqueued.
class Memorizer {
 public:
  explicit Memorizer(int length = 1, double v_bar = 8.0);

  /// Enqueues the measurements and returns
  /// [v history, v' history, v_bar, circogram history], oldest first. Until the
  /// queues are full the oldest entry is repeated.
  Eigen::VectorXd make_state(double v, double v_prime, std::span<const double> d);
  void reset();

  int length() const { return length_; }
  static int state_dim(int length, int ray_count) { return 2 * length + 1 + length * ray_count; }

 private:
  int length_;
  double v_bar_;
  std::deque<double> v_;
  std::deque<double> v_prime_;
  std::deque<std::vector<double>> d_;
};

/// Builds network inputs [state, u, s], optionally scaling speeds by v_bar
/// and distances by alpha.
struct InputEncoder {
  int memory_length = 1;
  int ray_count = 25;
  double v_bar = 8.0;
  double alpha = 12.0;
  bool normalize = false;

  int input_dim() const { return Memorizer::state_dim(memory_length, ray_count) + 2; }

  template <typename Scalar>
  void encode(const Eigen::VectorXd& state, const Action& a,
              Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> out) const;
};

// --- Explorer ----------------------------------------------------------------

struct ExploreSchedule {
  std::uint64_t t0 = 100000;
  double base = 0.99999;
};

/// 1 up to t0 ticks, then base^(t - t0).
double p_explore(std::uint64_t t, const ExploreSchedule& schedule = {});

/// With probability p a uniform pick among allowed pairs with u > 0,
/// otherwise the first maximizer of the network over all allowed pairs.
template <typename Scalar>
Action choose_action(const Eigen::VectorXd& state, const AllowedActions& allowed,
                     const Mlp<Scalar>& net, Rng& rng, double p, const InputEncoder& encoder);

// --- Reward ------------------------------------------------------------------

struct RewardParams {
  std::array<double, 3> theta{0.4, 1.0, 3.0};
  double v_bar = 8.0;
  double d_bar = 2.0;
  double collision_reward = -20.0;
};

/// Deviations x1 (yaw-rate change), x2 (lateral placement), x3 (speed error).
std::array<double, 3> reward_terms(double prev_yaw_rate, const TickOutput& cur,
                                   const RewardParams& params = {});
double reward_from_terms(const std::array<double, 3>& x, const RewardParams& params = {});
double reward(double prev_yaw_rate, const TickOutput& cur, const RewardParams& params = {});

// --- Sequencer ---------------------------------------------------------------

struct CommandSequence {
  std::vector<double> u;
  std::vector<double> s;

  std::size_t size() const { return u.size(); }
  Command at(std::size_t i) const { return {u[i], s[i]}; }
};

/// n-point linear ramps from the previous to the current action, per channel.
std::vector<double> ramp(double from, double to, int n);
CommandSequence sequence(const Action& previous, const Action& current, int n);

// --- Replay buffer -----------------------------------------------------------

struct SarsTuple {
  Eigen::VectorXd s;
  Action a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool terminal = false;
  AllowedActions allowed_next;
};

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000);

  void push(SarsTuple tuple);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest tuple.
  const SarsTuple& at(std::size_t i) const;

  /// Uniform with replacement. Throws if fewer than `batch` tuples are stored.
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<SarsTuple> data_;
  std::size_t head_ = 0;  // index of the oldest tuple once full
};

// --- DQN update --------------------------------------------------------------

struct TrainerConfig {
  double gamma = 0.95;
  std::size_t batch = 16;
  std::size_t warmup = 500;
  int n = 10;
  ExploreSchedule explore;
};

/// r for terminal tuples, else r + gamma * max_a' Q(s_next, a') over allowed_next.
template <typename Scalar>
double td_target(const SarsTuple& tuple, const Mlp<Scalar>& net, double gamma,
                 const InputEncoder& encoder);

/// Batched form of td_target for several tuples.
template <typename Scalar>
std::vector<double> td_targets(std::span<const SarsTuple* const> tuples, const Mlp<Scalar>& net,
                               double gamma, const InputEncoder& encoder);

/// One minibatch MSE + Adam step. Returns the batch loss before the update, or
/// nullopt while the buffer holds fewer than `warmup` tuples.
template <typename Scalar>
std::optional<double> train_step(Mlp<Scalar>& net, AdamState<Scalar>& adam,
                                 const ReplayBuffer& buffer, const TrainerConfig& cfg, Rng& rng,
                                 const InputEncoder& encoder);

// --- Agent loop --------------------------------------------------------------

enum class Policy {
  learn,   ///< explore per schedule, store transitions, train
  greedy,  ///< p = 0, no training
  random,  ///< p = 1, no training
};

/// One completed transition.
struct DecisionRecord {
  std::uint64_t tick = 0;
  std::uint64_t decision = 0;
  double reward = 0.0;
  double p_explore = 1.0;
  bool collision = false;
  double v = 0.0;
  std::optional<double> loss;
};

struct AgentConfig {
  TrainerConfig trainer;
  RewardParams reward;
  InputEncoder encoder;
  std::size_t buffer_capacity = 1000;
  Policy policy = Policy::learn;
};

template <typename Scalar>
class Agent {
 public:
  using Sink = std::function<void(const DecisionRecord&)>;

  Agent(Simulator& sim, Navigator& navigator, Mlp<Scalar>& net, AdamState<Scalar>* adam,
        AgentConfig config, std::uint64_t seed);

  /// Advances the simulator until it has run `ticks` more ticks, reporting
  /// every completed transition.
  void run(std::uint64_t ticks, const Sink& sink);

  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t decisions() const { return completed_; }
  /// Decision ticks at which a new action was chosen.
  const std::vector<std::uint64_t>& decision_ticks() const { return decision_ticks_; }
  void keep_decision_ticks(bool on) { track_ticks_ = on; }
  /// Called with every tuple right after it is stored.
  void on_tuple(std::function<void(const SarsTuple&)> hook) { tuple_hook_ = std::move(hook); }

 private:
  struct Pending {
    Eigen::VectorXd s;
    Action a;
    double p = 1.0;
    double yaw_rate = 0.0;
  };

  void begin();
  void decide(const Eigen::VectorXd& state, AllowedActions allowed, double yaw_rate);
  void complete(const TickOutput& out, bool terminal, const Sink& sink);
  double explore_probability() const;

  Simulator& sim_;
  Navigator& navigator_;
  Mlp<Scalar>& net_;
  AdamState<Scalar>* adam_;
  AgentConfig config_;
  Memorizer memorizer_;
  ReplayBuffer buffer_;
  Rng explore_rng_;
  Rng sample_rng_;

  bool started_ = false;
  Pending pending_;
  Action last_action_;
  CommandSequence commands_;
  std::size_t applied_ = 0;
  std::uint64_t completed_ = 0;
  bool track_ticks_ = false;
  std::vector<std::uint64_t> decision_ticks_;
  std::function<void(const SarsTuple&)> tuple_hook_;
};

}  // namespace rlds
