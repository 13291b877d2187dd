#include "rlds/simulator.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rlds {

void SensorParams::validate() const {
  if (ray_count < 2) throw std::invalid_argument("sensor.ray_count must be >= 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("sensor.alpha must be > 0");
  if (!(beta_deg > 0.0 && beta_deg <= 360.0))
    throw std::invalid_argument("sensor.beta_deg must be in (0, 360]");
}

double ray_angle(int i, double heading, const SensorParams& sp) {
  const double beta = sp.beta_deg * std::numbers::pi / 180.0;
  return heading + 0.5 * beta - i * beta / (sp.ray_count - 1);
}

std::vector<double> circogram(const VehicleState& state, const Corridor& corridor,
                              const SensorParams& sp) {
  std::vector<double> d(static_cast<std::size_t>(sp.ray_count));
  for (int i = 0; i < sp.ray_count; ++i)
    d[static_cast<std::size_t>(i)] =
        corridor.raycast(state.pose.position, ray_angle(i, state.pose.heading, sp), sp.alpha);
  return d;
}

bool collides(const VehicleState& state, const Corridor& corridor, const VehicleParams& params) {
  const auto probes = footprint(state, params);
  return std::any_of(probes.begin(), probes.end(),
                     [&](const Point2& p) { return !corridor.contains(p); });
}

Simulator::Simulator(RoadNetwork network, VehicleParams vehicle, SimConfig config)
    : network_(std::move(network)), vehicle_(vehicle), config_(config), rng_(config.seed) {
  vehicle_.validate();
  config_.sensor.validate();
  if (!(config_.dt > 0.0)) throw std::invalid_argument("sim.dt must be > 0");
  if (network_.spawns().empty()) throw std::invalid_argument("road network has no spawns");
  for (std::size_t i = 0; i < network_.spawns().size(); ++i)
    if (!footprint_inside(network_.spawns()[i], network_.corridor(), vehicle_))
      throw std::invalid_argument("spawn " + std::to_string(i) +
                                  ": vehicle footprint leaves the corridor");
  respawn();
}

void Simulator::respawn() {
  const auto& spawns = network_.spawns();
  std::uniform_int_distribution<std::size_t> pick(0, spawns.size() - 1);
  state_ = VehicleState{spawns[pick(rng_)], 0.0, 0.0};
}

TickOutput Simulator::measure(bool collided) const {
  TickOutput out;
  out.v = state_.v;
  out.v_prime = state_.yaw_rate;
  out.c = collided;
  if (network_.corridor().contains(state_.pose.position))
    out.d = circogram(state_, network_.corridor(), config_.sensor);
  else
    out.d.assign(static_cast<std::size_t>(config_.sensor.ray_count), 0.0);
  return out;
}

TickOutput Simulator::observe() const {
  return measure(collides(state_, network_.corridor(), vehicle_));
}

TickOutput Simulator::tick(const Command& cmd) {
  state_ = step(state_, cmd, config_.dt, vehicle_);
  ++ticks_;
  const bool collided = collides(state_, network_.corridor(), vehicle_);
  TickOutput out = measure(collided);
  if (collided) respawn();
  return out;
}

}  // namespace rlds
