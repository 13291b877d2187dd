#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rlds/geometry.hpp"
#include "rlds/vehicle.hpp"

namespace rlds {

struct SensorParams {
  double alpha = 12.0;     ///< max ray distance, m
  double beta_deg = 180.0; ///< angle from leftmost to rightmost ray
  int ray_count = 25;

  void validate() const;
};

/// Measurements produced by one tick: v, v', the circogram d and the
/// collision flag c.
struct TickOutput {
  double v = 0.0;
  double v_prime = 0.0;
  std::vector<double> d;
  bool c = false;
};

struct SimConfig {
  double dt = 0.02;
  SensorParams sensor;
  std::uint64_t seed = 0;
};

/// World angle of ray i (0-based; 0 is the leftmost ray).
double ray_angle(int i, double heading, const SensorParams& sp);

/// Curb distances from the vehicle center, leftmost ray first. Throws if the
/// center lies outside the corridor.
std::vector<double> circogram(const VehicleState& state, const Corridor& corridor,
                              const SensorParams& sp);

bool collides(const VehicleState& state, const Corridor& corridor, const VehicleParams& params);

class Simulator {
 public:
  Simulator(RoadNetwork network, VehicleParams vehicle, SimConfig config);

  /// Measurements of the current state without advancing time.
  TickOutput observe() const;

  /// Steps the vehicle by dt. On collision the returned measurements describe
  /// the collision and the vehicle is already respawned.
  TickOutput tick(const Command& cmd);

  const VehicleState& state() const { return state_; }
  void set_state(const VehicleState& state) { state_ = state; }

  std::uint64_t ticks() const { return ticks_; }
  double time() const { return static_cast<double>(ticks_) * config_.dt; }

  const RoadNetwork& network() const { return network_; }
  const SimConfig& config() const { return config_; }
  const VehicleParams& vehicle() const { return vehicle_; }

 private:
  TickOutput measure(bool collided) const;
  void respawn();

  RoadNetwork network_;
  VehicleParams vehicle_;
  SimConfig config_;
  std::mt19937_64 rng_;
  VehicleState state_;
  std::uint64_t ticks_ = 0;
};

}  // namespace rlds
