#include "rlds/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace rlds {

void VehicleParams::validate() const {
  if (!(wheelbase > 0 && max_wheel_angle > 0 && a_max > 0 && b_max > 0 && drag > 0 && length > 0 &&
        width > 0))
    throw std::invalid_argument("vehicle parameters must all be positive");
  if (!(max_wheel_angle < 0.5 * std::numbers::pi))
    throw std::invalid_argument("vehicle.max_wheel_angle must be below pi/2");
}

Pedals split_command(double u) {
  if (u >= 0.0) return {u, 0.0};
  return {0.0, -u};
}

VehicleState step(const VehicleState& state, const Command& cmd, double dt,
                  const VehicleParams& params) {
  const Pedals pedals = split_command(cmd.u);
  // Steering sign is inverted against the counterclockwise heading so that
  // negative steering turns left.
  const double wheel_angle = -cmd.s * params.max_wheel_angle;
  const double accel = params.a_max * pedals.throttle - params.b_max * pedals.brake -
                       params.drag * state.v;

  VehicleState next = state;
  next.v = std::max(0.0, state.v + accel * dt);
  next.yaw_rate = state.v * std::tan(wheel_angle) / params.wheelbase;
  const double heading = state.pose.heading;
  next.pose.heading = normalize_angle(heading + next.yaw_rate * dt);
  next.pose.position =
      state.pose.position + state.v * dt * Point2(std::cos(heading), std::sin(heading));
  return next;
}

std::array<Point2, 8> footprint(const VehicleState& state, const VehicleParams& params) {
  const double hl = 0.5 * params.length;
  const double hw = 0.5 * params.width;
  const Eigen::Rotation2Dd rot(state.pose.heading);
  const std::array<Point2, 8> local{
      Point2(hl, hw), Point2(hl, -hw), Point2(-hl, -hw), Point2(-hl, hw),
      Point2(hl, 0.0), Point2(0.0, -hw), Point2(-hl, 0.0), Point2(0.0, hw),
  };
  std::array<Point2, 8> world;
  std::transform(local.begin(), local.end(), world.begin(),
                 [&](const Point2& p) { return Point2(state.pose.position + rot * p); });
  return world;
}

bool footprint_inside(const Pose& pose, const Corridor& corridor, const VehicleParams& params) {
  const auto probes = footprint(VehicleState{pose, 0.0, 0.0}, params);
  return std::all_of(probes.begin(), probes.end(),
                     [&](const Point2& p) { return corridor.contains(p); });
}

}  // namespace rlds
