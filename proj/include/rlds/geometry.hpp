#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace rlds {

using Point2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

struct Pose {
  Point2 position = Point2::Zero();
  double heading = 0.0;  ///< radians, counterclockwise from +x, in (-pi, pi]
};

struct RoadSegmentSpec {
  std::string id;
  double width = 0.0;
  std::vector<Point2> centerline;
};

/// Drivable corridor: the union of strips of half-width w/2 around every
/// road centerline. The boundary of that union is the curb.
///
/// Queries are answered through a uniform grid of segment buckets. A bucket
/// lists every segment whose strip touches the cell, so `contains` only ever
/// needs the bucket under the query point.
class Corridor {
 public:
  explicit Corridor(std::vector<RoadSegmentSpec> roads);

  const std::vector<RoadSegmentSpec>& roads() const { return roads_; }

  /// max over roads of (width/2 - distance to centerline); >= 0 iff inside.
  double clearance(const Point2& p) const;
  bool contains(const Point2& p) const;

  /// Distance to the first inside->outside crossing along the ray, or
  /// max_dist if none. Throws if the origin lies outside the corridor.
  double raycast(const Point2& origin, double direction, double max_dist) const;

  double total_length() const { return total_length_; }
  /// Point and unit tangent at arc length s along the concatenated centerlines.
  std::pair<Point2, Point2> point_at(double s) const;

 private:
  struct Segment {
    Point2 a;
    Point2 b;
    double half_width;
    double cum_start;  // arc length before this segment
  };

  static constexpr double kCell = 4.0;

  std::int64_t cell_key(const Point2& p) const;
  double clearance_brute(const Point2& p) const;

  std::vector<RoadSegmentSpec> roads_;
  std::vector<Segment> segments_;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> buckets_;
  double total_length_ = 0.0;
};

/// Distance from p to the segment [a, b].
double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

struct RayMarch {
  double step = 0.1;
  double tolerance = 0.001;
};

class RoadNetwork {
 public:
  RoadNetwork(std::vector<RoadSegmentSpec> roads, std::vector<Pose> spawns);

  const Corridor& corridor() const { return corridor_; }
  const std::vector<RoadSegmentSpec>& roads() const { return corridor_.roads(); }
  const std::vector<Pose>& spawns() const { return spawns_; }

 private:
  Corridor corridor_;
  std::vector<Pose> spawns_;
};

double clearance(const Point2& p, const Corridor& corridor);
double raycast(const Point2& origin, double direction, double max_dist,
               const Corridor& corridor);

using SpawnFilter = std::function<bool(const Pose&, const Corridor&)>;

/// k poses uniform by arc length over all centerlines, heading along the local
/// tangent with a fair coin for direction. Samples rejected by `accept` are
/// redrawn.
std::vector<Pose> sample_spawns(const Corridor& corridor, std::size_t k,
                                std::uint64_t seed,
                                const SpawnFilter& accept = {});

/// Closed loop made of two straights joined by half circles.
RoadSegmentSpec make_stadium_loop(double straight, double radius, double width,
                                  int arc_segments = 48);

// Road network file (JSON).
RoadNetwork load_road_network(const std::string& path,
                              std::size_t default_spawns = 64,
                              std::uint64_t seed = 0,
                              const SpawnFilter& accept = {});
RoadNetwork parse_road_network(const std::string& text,
                               std::size_t default_spawns = 64,
                               std::uint64_t seed = 0,
                               const SpawnFilter& accept = {});
std::string serialize_road_network(const std::vector<RoadSegmentSpec>& roads,
                                   const std::vector<Pose>& spawns);

}  // namespace rlds
