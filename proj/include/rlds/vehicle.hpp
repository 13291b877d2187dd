#pragma once

#include <array>

#include "rlds/geometry.hpp"

namespace rlds {

struct VehicleParams {
  double wheelbase = 2.7;
  double max_wheel_angle = 0.5236;  // 30 degrees
  double a_max = 4.0;
  double b_max = 8.0;
  double drag = 0.05;
  double length = 4.5;
  double width = 1.8;

  void validate() const;
};

struct VehicleState {
  Pose pose;
  double v = 0.0;         ///< longitudinal velocity, m/s, never negative
  double yaw_rate = 0.0;  ///< rad/s
};

/// Merged brake/throttle value u and steering s. Negative steering turns left.
struct Command {
  double u = 0.0;
  double s = 0.0;
};

struct Pedals {
  double throttle = 0.0;
  double brake = 0.0;
};

/// Positive u is throttle with the brake released, negative u is brake with
/// the throttle released.
Pedals split_command(double u);

/// Forward-Euler kinematic bicycle step. Position advances with the heading
/// and speed from before the update.
VehicleState step(const VehicleState& state, const Command& cmd, double dt,
                  const VehicleParams& params = {});

/// Four corners then four edge midpoints of the body rectangle.
std::array<Point2, 8> footprint(const VehicleState& state, const VehicleParams& params = {});

bool footprint_inside(const Pose& pose, const Corridor& corridor,
                      const VehicleParams& params = {});

}  // namespace rlds
