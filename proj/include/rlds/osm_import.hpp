#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlds/geometry.hpp"

namespace rlds::osm {

struct OsmNode {
  std::int64_t id = 0;
  double lat = 0.0;
  double lon = 0.0;
};

struct OsmWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> node_refs;
  std::map<std::string, std::string> tags;
};

struct OsmData {
  std::vector<OsmNode> nodes;
  std::vector<OsmWay> ways;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Local equirectangular projection around a fixed reference point.
struct Projection {
  double ref_lat = 0.0;
  double ref_lon = 0.0;
  double earth_radius = 6371000.0;
};

/// Extracts <node> and <way> elements; everything else is ignored.
OsmData parse_osm(const std::string& xml);

Point2 project(double lat, double lon, const Projection& proj);
/// Returns (lat, lon).
std::pair<double, double> unproject(const Point2& p, const Projection& proj);

/// Mean lat/lon of the nodes referenced by drivable ways.
Projection centroid_projection(const OsmData& data);

bool is_drivable(const OsmWay& way);
/// Default width for a highway class, or 0 when the class is not drivable.
double default_width(const std::string& highway);

std::vector<RoadSegmentSpec> ways_to_roads(const OsmData& data, const Projection& proj);

}  // namespace rlds::osm
