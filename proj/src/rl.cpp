#include "rlds/rl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlds {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// --- Memorizer ---------------------------------------------------------------

Memorizer::Memorizer(int length, double v_bar) : length_(length), v_bar_(v_bar) {
  if (length_ < 1) throw std::invalid_argument("memory length must be >= 1");
}

void Memorizer::reset() {
  v_.clear();
  v_prime_.clear();
  d_.clear();
}

Eigen::VectorXd Memorizer::make_state(double v, double v_prime, std::span<const double> d) {
  if (!d_.empty() && d_.back().size() != d.size())
    throw std::invalid_argument("circogram length changed between decisions");
  const auto h = static_cast<std::size_t>(length_);
  auto enqueue = [h](auto& queue, auto value) {
    if (queue.empty())
      queue.assign(h, value);
    else
      queue.push_back(std::move(value));
    while (queue.size() > h) queue.pop_front();
  };
  enqueue(v_, v);
  enqueue(v_prime_, v_prime);
  enqueue(d_, std::vector<double>(d.begin(), d.end()));

  const auto rays = static_cast<Eigen::Index>(d.size());
  Eigen::VectorXd state(Memorizer::state_dim(length_, static_cast<int>(rays)));
  Eigen::Index k = 0;
  for (double x : v_) state[k++] = x;
  for (double x : v_prime_) state[k++] = x;
  state[k++] = v_bar_;
  for (const auto& circ : d_) {
    state.segment(k, rays) = Eigen::Map<const Eigen::VectorXd>(circ.data(), rays);
    k += rays;
  }
  return state;
}

template <typename Scalar>
void InputEncoder::encode(const Eigen::VectorXd& state, const Action& a,
                          Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> out) const {
  const Eigen::Index dim = state.size();
  if (out.size() != dim + 2) throw std::invalid_argument("encoder: input length mismatch");
  if (!normalize) {
    out.head(dim) = state.cast<Scalar>();
  } else {
    const Eigen::Index h = memory_length;
    Eigen::VectorXd scaled = state;
    scaled.head(h) /= v_bar;          // v history
    scaled(2 * h) /= v_bar;           // target velocity
    scaled.tail(dim - 2 * h - 1) /= alpha;
    out.head(dim) = scaled.cast<Scalar>();
  }
  out(dim) = static_cast<Scalar>(a.u);
  out(dim + 1) = static_cast<Scalar>(a.s);
}

// --- Explorer ----------------------------------------------------------------

double p_explore(std::uint64_t t, const ExploreSchedule& schedule) {
  if (t <= schedule.t0) return 1.0;
  return std::pow(schedule.base, static_cast<double>(t - schedule.t0));
}

namespace {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
MatrixX<Scalar> encode_candidates(const Eigen::VectorXd& state, const std::vector<Action>& pairs,
                                  const InputEncoder& encoder) {
  MatrixX<Scalar> x(state.size() + 2, static_cast<Eigen::Index>(pairs.size()));
  if (pairs.empty()) return x;
  encoder.encode<Scalar>(state, pairs.front(), x.col(0));
  for (Eigen::Index j = 1; j < x.cols(); ++j) {
    x.col(j).head(state.size()) = x.col(0).head(state.size());
    x(state.size(), j) = static_cast<Scalar>(pairs[static_cast<std::size_t>(j)].u);
    x(state.size() + 1, j) = static_cast<Scalar>(pairs[static_cast<std::size_t>(j)].s);
  }
  return x;
}

}  // namespace

template <typename Scalar>
Action choose_action(const Eigen::VectorXd& state, const AllowedActions& allowed,
                     const Mlp<Scalar>& net, Rng& rng, double p, const InputEncoder& encoder) {
  if (allowed.pairs.empty()) throw std::invalid_argument("no allowed actions");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < p) {
    std::vector<const Action*> forward;
    for (const auto& a : allowed.pairs)
      if (a.u > 0.0) forward.push_back(&a);
    if (forward.empty()) throw std::invalid_argument("no allowed action with u > 0");
    std::uniform_int_distribution<std::size_t> pick(0, forward.size() - 1);
    return *forward[pick(rng)];
  }
  const auto q = net.forward_batch(encode_candidates<Scalar>(state, allowed.pairs, encoder));
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < q.size(); ++j)
    if (q(j) > q(best)) best = j;
  return allowed.pairs[static_cast<std::size_t>(best)];
}

// --- Reward ------------------------------------------------------------------

std::array<double, 3> reward_terms(double prev_yaw_rate, const TickOutput& cur,
                                   const RewardParams& params) {
  if (cur.d.size() < 2) throw std::invalid_argument("reward needs a circogram");
  const double left = cur.d.front();
  const double right = cur.d.back();
  const double width = left + right;
  const double x2 = width < 2.0 * params.d_bar ? std::abs(left - right)
                                               : std::abs(params.d_bar - right);
  return {std::abs(prev_yaw_rate - cur.v_prime), x2, std::abs(cur.v - params.v_bar)};
}

double reward_from_terms(const std::array<double, 3>& x, const RewardParams& params) {
  double r = -3.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double z = x[i] / params.theta[i];
    r += std::exp(-0.5 * z * z);
  }
  return r;
}

double reward(double prev_yaw_rate, const TickOutput& cur, const RewardParams& params) {
  if (cur.c) return params.collision_reward;
  return reward_from_terms(reward_terms(prev_yaw_rate, cur, params), params);
}

// --- Sequencer ---------------------------------------------------------------

std::vector<double> ramp(double from, double to, int n) {
  if (n < 2) throw std::invalid_argument("sequence length must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (to - from) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = from + i * step;
  out.back() = to;
  return out;
}

CommandSequence sequence(const Action& previous, const Action& current, int n) {
  return {ramp(previous.u, current.u, n), ramp(previous.s, current.s, n)};
}

// --- Replay buffer -----------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be > 0");
  data_.reserve(capacity_);
}

void ReplayBuffer::push(SarsTuple tuple) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(tuple));
    return;
  }
  data_[head_] = std::move(tuple);
  head_ = (head_ + 1) % capacity_;
}

const SarsTuple& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay buffer index out of range");
  return data_[(head_ + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
  if (data_.size() < batch || data_.empty())
    throw std::logic_error("replay buffer holds " + std::to_string(data_.size()) +
                           " tuples, cannot sample " + std::to_string(batch));
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

// --- DQN update --------------------------------------------------------------

template <typename Scalar>
std::vector<double> td_targets(std::span<const SarsTuple* const> tuples, const Mlp<Scalar>& net,
                               double gamma, const InputEncoder& encoder) {
  std::vector<double> targets(tuples.size());
  Eigen::Index columns = 0;
  for (const SarsTuple* t : tuples)
    if (!t->terminal) columns += static_cast<Eigen::Index>(t->allowed_next.pairs.size());

  MatrixX<Scalar> x(encoder.input_dim(), columns);
  Eigen::Index col = 0;
  for (const SarsTuple* t : tuples) {
    if (t->terminal) continue;
    const auto n = static_cast<Eigen::Index>(t->allowed_next.pairs.size());
    if (n == 0) throw std::invalid_argument("non-terminal tuple without allowed actions");
    x.middleCols(col, n) = encode_candidates<Scalar>(t->s_next, t->allowed_next.pairs, encoder);
    col += n;
  }
  const auto q = columns > 0 ? net.forward_batch(x) : typename Mlp<Scalar>::RowVector();

  col = 0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const SarsTuple& t = *tuples[i];
    if (t.terminal) {
      targets[i] = t.r;
      continue;
    }
    const auto n = static_cast<Eigen::Index>(t.allowed_next.pairs.size());
    targets[i] = t.r + gamma * static_cast<double>(q.segment(col, n).maxCoeff());
    col += n;
  }
  return targets;
}

template <typename Scalar>
double td_target(const SarsTuple& tuple, const Mlp<Scalar>& net, double gamma,
                 const InputEncoder& encoder) {
  const SarsTuple* one[] = {&tuple};
  return td_targets<Scalar>(one, net, gamma, encoder).front();
}

template <typename Scalar>
std::optional<double> train_step(Mlp<Scalar>& net, AdamState<Scalar>& adam,
                                 const ReplayBuffer& buffer, const TrainerConfig& cfg, Rng& rng,
                                 const InputEncoder& encoder) {
  if (buffer.size() < std::max(cfg.warmup, cfg.batch)) return std::nullopt;
  const auto indices = buffer.sample_indices(cfg.batch, rng);
  std::vector<const SarsTuple*> batch;
  batch.reserve(indices.size());
  for (auto i : indices) batch.push_back(&buffer.at(i));

  const auto targets = td_targets<Scalar>(batch, net, cfg.gamma, encoder);
  MatrixX<Scalar> x(encoder.input_dim(), static_cast<Eigen::Index>(batch.size()));
  typename Mlp<Scalar>::RowVector y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    encoder.encode<Scalar>(batch[i]->s, batch[i]->a, x.col(c));
    y(c) = static_cast<Scalar>(targets[i]);
  }
  Gradients<Scalar> grads;
  const Scalar loss = net.backward(x, y, grads);
  adam_step(net, adam, grads);
  return static_cast<double>(loss);
}

// --- Agent loop --------------------------------------------------------------

namespace stream {
constexpr std::uint32_t explorer = 3;
constexpr std::uint32_t sampler = 4;
}  // namespace stream

template <typename Scalar>
Agent<Scalar>::Agent(Simulator& sim, Navigator& navigator, Mlp<Scalar>& net,
                     AdamState<Scalar>* adam, AgentConfig config, std::uint64_t seed)
    : sim_(sim),
      navigator_(navigator),
      net_(net),
      adam_(adam),
      config_(config),
      memorizer_(config.encoder.memory_length, config.reward.v_bar),
      buffer_(config.buffer_capacity),
      explore_rng_(derive_seed(seed, stream::explorer)),
      sample_rng_(derive_seed(seed, stream::sampler)) {
  if (config_.policy == Policy::learn && adam_ == nullptr)
    throw std::invalid_argument("learning agent needs an optimizer state");
  if (net_.input_dim() != config_.encoder.input_dim())
    throw std::invalid_argument("network input dimension " + std::to_string(net_.input_dim()) +
                                " does not match state layout (" +
                                std::to_string(config_.encoder.input_dim()) + ")");
  if (config_.trainer.n < 2) throw std::invalid_argument("agent.n must be >= 2");
}

template <typename Scalar>
double Agent<Scalar>::explore_probability() const {
  switch (config_.policy) {
    case Policy::learn: return p_explore(sim_.ticks(), config_.trainer.explore);
    case Policy::greedy: return 0.0;
    case Policy::random: return 1.0;
  }
  return 1.0;
}

template <typename Scalar>
void Agent<Scalar>::decide(const Eigen::VectorXd& state, AllowedActions allowed, double yaw_rate) {
  const double p = explore_probability();
  const Action action = choose_action(state, allowed, net_, explore_rng_, p, config_.encoder);
  commands_ = sequence(last_action_, action, config_.trainer.n);
  applied_ = 0;
  last_action_ = action;
  pending_ = Pending{state, action, p, yaw_rate};
  if (track_ticks_) decision_ticks_.push_back(sim_.ticks());
}

template <typename Scalar>
void Agent<Scalar>::begin() {
  memorizer_.reset();
  navigator_.reset();
  last_action_ = Action{};
  const TickOutput obs = sim_.observe();
  Eigen::VectorXd state = memorizer_.make_state(obs.v, obs.v_prime, obs.d);
  decide(state, navigator_.next(obs.d), obs.v_prime);
}

template <typename Scalar>
void Agent<Scalar>::complete(const TickOutput& out, bool terminal, const Sink& sink) {
  SarsTuple tuple;
  tuple.s = std::move(pending_.s);
  tuple.a = pending_.a;
  tuple.s_next = memorizer_.make_state(out.v, out.v_prime, out.d);
  tuple.allowed_next = navigator_.next(out.d);
  tuple.terminal = terminal;
  tuple.r = terminal ? config_.reward.collision_reward
                     : reward(pending_.yaw_rate, out, config_.reward);

  DecisionRecord rec;
  rec.tick = sim_.ticks();
  rec.decision = ++completed_;
  rec.reward = tuple.r;
  rec.p_explore = pending_.p;
  rec.collision = terminal;
  rec.v = out.v;

  if (config_.policy == Policy::learn) {
    if (tuple_hook_) tuple_hook_(tuple);
    const Eigen::VectorXd next_state = tuple.s_next;
    AllowedActions next_allowed = tuple.allowed_next;
    buffer_.push(std::move(tuple));
    rec.loss = train_step(net_, *adam_, buffer_, config_.trainer, sample_rng_, config_.encoder);
    if (!terminal) decide(next_state, std::move(next_allowed), out.v_prime);
  } else {
    if (tuple_hook_) tuple_hook_(tuple);
    if (!terminal) decide(tuple.s_next, std::move(tuple.allowed_next), out.v_prime);
  }
  if (sink) sink(rec);
}

template <typename Scalar>
void Agent<Scalar>::run(std::uint64_t ticks, const Sink& sink) {
  const std::uint64_t stop = sim_.ticks() + ticks;
  if (!started_ && ticks > 0) {
    begin();
    started_ = true;
  }
  while (sim_.ticks() < stop) {
    const TickOutput out = sim_.tick(commands_.at(applied_++));
    if (out.c) {
      complete(out, true, sink);
      // The simulator has already respawned; start over from the spawn pose.
      begin();
    } else if (applied_ == commands_.size()) {
      complete(out, false, sink);
    }
  }
}

template void InputEncoder::encode<float>(const Eigen::VectorXd&, const Action&,
                                          Eigen::Ref<Eigen::VectorXf>) const;
template void InputEncoder::encode<double>(const Eigen::VectorXd&, const Action&,
                                           Eigen::Ref<Eigen::VectorXd>) const;

#define RLDS_INSTANTIATE(Scalar)                                                              \
  template Action choose_action(const Eigen::VectorXd&, const AllowedActions&,                \
                                const Mlp<Scalar>&, Rng&, double, const InputEncoder&);       \
  template double td_target(const SarsTuple&, const Mlp<Scalar>&, double,                     \
                            const InputEncoder&);                                             \
  template std::vector<double> td_targets(std::span<const SarsTuple* const>,                  \
                                          const Mlp<Scalar>&, double, const InputEncoder&);   \
  template std::optional<double> train_step(Mlp<Scalar>&, AdamState<Scalar>&,                 \
                                            const ReplayBuffer&, const TrainerConfig&, Rng&,  \
                                            const InputEncoder&);                             \
  template class Agent<Scalar>;

RLDS_INSTANTIATE(float)
RLDS_INSTANTIATE(double)

#undef RLDS_INSTANTIATE

}  // namespace rlds
