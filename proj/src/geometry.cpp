#include "rlds/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rlds {

double normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Corridor::Corridor(std::vector<RoadSegmentSpec> roads) : roads_(std::move(roads)) {
  if (roads_.empty()) throw std::invalid_argument("road network has no roads");
  for (const auto& road : roads_) {
    if (!(road.width > 0.0) || !std::isfinite(road.width))
      throw std::invalid_argument("road '" + road.id + "': width must be > 0");
    if (road.centerline.size() < 2)
      throw std::invalid_argument("road '" + road.id + "': centerline needs >= 2 points");
    for (std::size_t i = 0; i < road.centerline.size(); ++i) {
      if (!road.centerline[i].allFinite())
        throw std::invalid_argument("road '" + road.id + "': non-finite point");
      if (i > 0 && road.centerline[i] == road.centerline[i - 1])
        throw std::invalid_argument("road '" + road.id + "': repeated centerline point");
    }
    for (std::size_t i = 0; i + 1 < road.centerline.size(); ++i) {
      const Point2& a = road.centerline[i];
      const Point2& b = road.centerline[i + 1];
      segments_.push_back({a, b, 0.5 * road.width, total_length_});
      total_length_ += (b - a).norm();
    }
  }

  for (std::uint32_t idx = 0; idx < segments_.size(); ++idx) {
    const Segment& s = segments_[idx];
    const Point2 lo = s.a.cwiseMin(s.b).array() - s.half_width;
    const Point2 hi = s.a.cwiseMax(s.b).array() + s.half_width;
    const auto x0 = static_cast<std::int64_t>(std::floor(lo.x() / kCell));
    const auto x1 = static_cast<std::int64_t>(std::floor(hi.x() / kCell));
    const auto y0 = static_cast<std::int64_t>(std::floor(lo.y() / kCell));
    const auto y1 = static_cast<std::int64_t>(std::floor(hi.y() / kCell));
    for (auto cx = x0; cx <= x1; ++cx)
      for (auto cy = y0; cy <= y1; ++cy)
        buckets_[(cx << 32) ^ (cy & 0xffffffffLL)].push_back(idx);
  }
}

std::int64_t Corridor::cell_key(const Point2& p) const {
  const auto cx = static_cast<std::int64_t>(std::floor(p.x() / kCell));
  const auto cy = static_cast<std::int64_t>(std::floor(p.y() / kCell));
  return (cx << 32) ^ (cy & 0xffffffffLL);
}

double Corridor::clearance_brute(const Point2& p) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : segments_)
    best = std::max(best, s.half_width - point_segment_distance(p, s.a, s.b));
  return best;
}

double Corridor::clearance(const Point2& p) const {
  // A non-negative bucket maximum is the global one: the maximizing segment
  // is within its half-width of p and therefore listed in p's cell.
  if (auto it = buckets_.find(cell_key(p)); it != buckets_.end()) {
    double best = -std::numeric_limits<double>::infinity();
    for (auto idx : it->second) {
      const Segment& s = segments_[idx];
      best = std::max(best, s.half_width - point_segment_distance(p, s.a, s.b));
    }
    if (best >= 0.0) return best;
  }
  return clearance_brute(p);
}

bool Corridor::contains(const Point2& p) const {
  auto it = buckets_.find(cell_key(p));
  if (it == buckets_.end()) return false;
  for (auto idx : it->second) {
    const Segment& s = segments_[idx];
    if (point_segment_distance(p, s.a, s.b) <= s.half_width) return true;
  }
  return false;
}

double Corridor::raycast(const Point2& origin, double direction, double max_dist) const {
  constexpr RayMarch march;
  if (!contains(origin)) throw std::domain_error("ray from outside corridor");
  if (!(max_dist > 0.0)) return 0.0;
  const Point2 dir(std::cos(direction), std::sin(direction));
  // Samples sit on the fixed grid k * step regardless of max_dist, so a
  // shorter max_dist never moves a hit that lies before it.
  double prev = 0.0;
  for (std::int64_t k = 1; prev < max_dist; ++k) {
    const double t = static_cast<double>(k) * march.step;
    if (!contains(origin + t * dir)) {
      double lo = prev;
      double hi = t;
      while (hi - lo > march.tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (contains(origin + mid * dir))
          lo = mid;
        else
          hi = mid;
      }
      return std::min(0.5 * (lo + hi), max_dist);
    }
    prev = t;
  }
  return max_dist;
}

std::pair<Point2, Point2> Corridor::point_at(double s) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.cum_start; });
  const Segment& seg = it == segments_.begin() ? segments_.front() : *std::prev(it);
  const Point2 ab = seg.b - seg.a;
  const double len = ab.norm();
  const double t = std::clamp((s - seg.cum_start) / len, 0.0, 1.0);
  return {seg.a + t * ab, ab / len};
}

double clearance(const Point2& p, const Corridor& corridor) { return corridor.clearance(p); }

double raycast(const Point2& origin, double direction, double max_dist,
               const Corridor& corridor) {
  return corridor.raycast(origin, direction, max_dist);
}

RoadNetwork::RoadNetwork(std::vector<RoadSegmentSpec> roads, std::vector<Pose> spawns)
    : corridor_(std::move(roads)), spawns_(std::move(spawns)) {
  for (std::size_t i = 0; i < spawns_.size(); ++i) {
    if (!corridor_.contains(spawns_[i].position))
      throw std::invalid_argument("spawn " + std::to_string(i) + " lies outside the corridor");
    spawns_[i].heading = normalize_angle(spawns_[i].heading);
  }
}

std::vector<Pose> sample_spawns(const Corridor& corridor, std::size_t k, std::uint64_t seed,
                                const SpawnFilter& accept) {
  if (!(corridor.total_length() > 0.0))
    throw std::invalid_argument("cannot sample spawns on an empty network");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> arc(0.0, corridor.total_length());
  std::bernoulli_distribution coin(0.5);
  std::vector<Pose> out;
  out.reserve(k);
  const std::size_t max_draws = 1000 * std::max<std::size_t>(k, 1);
  std::size_t draws = 0;
  while (out.size() < k) {
    if (++draws > max_draws)
      throw std::runtime_error("could not place spawns: every candidate was rejected");
    const auto [p, tangent] = corridor.point_at(arc(rng));
    double heading = std::atan2(tangent.y(), tangent.x());
    if (coin(rng)) heading += std::numbers::pi;
    Pose pose{p, normalize_angle(heading)};
    if (accept && !accept(pose, corridor)) continue;
    out.push_back(pose);
  }
  return out;
}

RoadSegmentSpec make_stadium_loop(double straight, double radius, double width,
                                  int arc_segments) {
  RoadSegmentSpec road{"loop", width, {}};
  const double half = 0.5 * straight;
  auto arc = [&](double cx, double start) {
    for (int i = 1; i <= arc_segments; ++i) {
      const double a = start + std::numbers::pi * i / arc_segments;
      road.centerline.emplace_back(cx + radius * std::cos(a), radius * std::sin(a));
    }
  };
  road.centerline.emplace_back(-half, -radius);
  road.centerline.emplace_back(half, -radius);
  arc(half, -0.5 * std::numbers::pi);
  road.centerline.back() = Point2(half, radius);
  road.centerline.emplace_back(-half, radius);
  arc(-half, 0.5 * std::numbers::pi);
  road.centerline.back() = Point2(-half, -radius);
  return road;
}

namespace {

RoadNetwork network_from_json(const nlohmann::json& doc, std::size_t default_spawns,
                              std::uint64_t seed, const SpawnFilter& accept) {
  if (!doc.contains("roads") || !doc["roads"].is_array())
    throw std::invalid_argument("road network: missing 'roads' array");
  std::vector<RoadSegmentSpec> roads;
  for (const auto& r : doc["roads"]) {
    RoadSegmentSpec spec;
    spec.id = r.at("id").get<std::string>();
    spec.width = r.at("width_m").get<double>();
    for (const auto& xy : r.at("centerline")) {
      if (!xy.is_array() || xy.size() != 2)
        throw std::invalid_argument("road '" + spec.id + "': centerline entries must be [x, y]");
      spec.centerline.emplace_back(xy[0].get<double>(), xy[1].get<double>());
    }
    roads.push_back(std::move(spec));
  }
  std::vector<Pose> spawns;
  if (doc.contains("spawns")) {
    for (const auto& s : doc["spawns"]) {
      if (!s.is_array() || s.size() != 3)
        throw std::invalid_argument("road network: spawns entries must be [x, y, heading]");
      spawns.push_back({Point2(s[0].get<double>(), s[1].get<double>()), s[2].get<double>()});
    }
    return RoadNetwork(std::move(roads), std::move(spawns));
  }
  Corridor corridor(roads);
  spawns = sample_spawns(corridor, default_spawns, seed, accept);
  return RoadNetwork(std::move(roads), std::move(spawns));
}

}  // namespace

RoadNetwork parse_road_network(const std::string& text, std::size_t default_spawns,
                               std::uint64_t seed, const SpawnFilter& accept) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("road network: ") + e.what());
  }
  try {
    return network_from_json(doc, default_spawns, seed, accept);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("road network: ") + e.what());
  }
}

RoadNetwork load_road_network(const std::string& path, std::size_t default_spawns,
                              std::uint64_t seed, const SpawnFilter& accept) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open road network file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_road_network(buf.str(), default_spawns, seed, accept);
}

std::string serialize_road_network(const std::vector<RoadSegmentSpec>& roads,
                                   const std::vector<Pose>& spawns) {
  nlohmann::ordered_json doc;
  doc["roads"] = nlohmann::ordered_json::array();
  for (const auto& r : roads) {
    nlohmann::ordered_json road;
    road["id"] = r.id;
    road["width_m"] = r.width;
    road["centerline"] = nlohmann::ordered_json::array();
    for (const auto& p : r.centerline) road["centerline"].push_back({p.x(), p.y()});
    doc["roads"].push_back(std::move(road));
  }
  doc["spawns"] = nlohmann::ordered_json::array();
  for (const auto& s : spawns)
    doc["spawns"].push_back({s.position.x(), s.position.y(), s.heading});
  return doc.dump(1) + "\n";
}

}  // namespace rlds
