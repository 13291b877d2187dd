#include "rlds/osm_import.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace rlds::osm {

namespace pt = boost::property_tree;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

template <typename T>
T attribute(const pt::ptree& element, const char* name, const char* what) {
  auto value = element.get_optional<T>(std::string("<xmlattr>.") + name);
  if (!value) throw ParseError(std::string(what) + ": missing or invalid attribute '" + name + "'");
  return *value;
}

const std::map<std::string, double>& width_table() {
  static const std::map<std::string, double> table{
      {"primary", 7.0},     {"secondary", 6.5},    {"tertiary", 6.0},
      {"residential", 5.0}, {"unclassified", 5.0}, {"living_street", 4.0},
  };
  return table;
}

std::optional<double> parse_width(const std::string& text) {
  std::size_t start = text.find_first_not_of(" \t");
  if (start == std::string::npos) return std::nullopt;
  double value = 0.0;
  const char* first = text.data() + start;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || !std::isfinite(value) || value <= 0.0) return std::nullopt;
  std::string rest(ptr, last);
  rest.erase(0, rest.find_first_not_of(" \t"));
  if (!rest.empty() && rest != "m") return std::nullopt;
  return value;
}

}  // namespace

OsmData parse_osm(const std::string& xml) {
  pt::ptree tree;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }

  OsmData data;
  std::unordered_map<std::int64_t, std::size_t> index;
  // Nodes and ways may sit at the top level or below a root such as <osm>.
  auto visit = [&](const pt::ptree& parent, auto&& self) -> void {
    for (const auto& [name, child] : parent) {
      if (name == "node") {
        OsmNode node{attribute<std::int64_t>(child, "id", "node"),
                     attribute<double>(child, "lat", "node"),
                     attribute<double>(child, "lon", "node")};
        if (!(node.lat >= -90.0 && node.lat <= 90.0) || !(node.lon >= -180.0 && node.lon <= 180.0))
          throw ParseError("node " + std::to_string(node.id) + ": coordinates out of range");
        index[node.id] = data.nodes.size();
        data.nodes.push_back(node);
      } else if (name == "way") {
        OsmWay way;
        way.id = attribute<std::int64_t>(child, "id", "way");
        for (const auto& [sub_name, sub] : child) {
          if (sub_name == "nd") {
            way.node_refs.push_back(attribute<std::int64_t>(sub, "ref", "nd"));
          } else if (sub_name == "tag") {
            way.tags[attribute<std::string>(sub, "k", "tag")] = attribute<std::string>(sub, "v", "tag");
          }
        }
        data.ways.push_back(std::move(way));
      } else if (name != "<xmlattr>" && name != "<xmlcomment>") {
        self(child, self);
      }
    }
  };
  visit(tree, visit);

  for (const auto& way : data.ways) {
    if (way.node_refs.size() < 2)
      throw ParseError("way " + std::to_string(way.id) + ": needs at least 2 node refs");
    for (auto ref : way.node_refs)
      if (!index.contains(ref))
        throw ParseError("way " + std::to_string(way.id) + ": missing node " + std::to_string(ref));
  }
  return data;
}

Point2 project(double lat, double lon, const Projection& proj) {
  const double x = proj.earth_radius * (lon - proj.ref_lon) * kDeg * std::cos(proj.ref_lat * kDeg);
  const double y = proj.earth_radius * (lat - proj.ref_lat) * kDeg;
  return {x, y};
}

std::pair<double, double> unproject(const Point2& p, const Projection& proj) {
  const double lat = proj.ref_lat + p.y() / (proj.earth_radius * kDeg);
  const double lon = proj.ref_lon + p.x() / (proj.earth_radius * kDeg * std::cos(proj.ref_lat * kDeg));
  return {lat, lon};
}

double default_width(const std::string& highway) {
  const auto& table = width_table();
  auto it = table.find(highway);
  return it == table.end() ? 0.0 : it->second;
}

bool is_drivable(const OsmWay& way) {
  auto it = way.tags.find("highway");
  return it != way.tags.end() && default_width(it->second) > 0.0;
}

Projection centroid_projection(const OsmData& data) {
  std::unordered_map<std::int64_t, const OsmNode*> by_id;
  for (const auto& n : data.nodes) by_id[n.id] = &n;
  std::set<std::int64_t> used;
  for (const auto& way : data.ways)
    if (is_drivable(way)) used.insert(way.node_refs.begin(), way.node_refs.end());
  Projection proj;
  if (used.empty()) return proj;
  double lat = 0.0;
  double lon = 0.0;
  for (auto id : used) {
    lat += by_id.at(id)->lat;
    lon += by_id.at(id)->lon;
  }
  proj.ref_lat = lat / static_cast<double>(used.size());
  proj.ref_lon = lon / static_cast<double>(used.size());
  return proj;
}

std::vector<RoadSegmentSpec> ways_to_roads(const OsmData& data, const Projection& proj) {
  std::unordered_map<std::int64_t, const OsmNode*> by_id;
  for (const auto& n : data.nodes) by_id[n.id] = &n;

  std::vector<RoadSegmentSpec> roads;
  for (const auto& way : data.ways) {
    if (!is_drivable(way)) continue;
    RoadSegmentSpec road;
    road.id = std::to_string(way.id);
    road.width = default_width(way.tags.at("highway"));
    if (auto w = way.tags.find("width"); w != way.tags.end())
      if (auto parsed = parse_width(w->second)) road.width = *parsed;
    for (auto ref : way.node_refs) {
      auto it = by_id.find(ref);
      if (it == by_id.end())
        throw ParseError("way " + std::to_string(way.id) + ": missing node " + std::to_string(ref));
      Point2 p = project(it->second->lat, it->second->lon, proj);
      if (road.centerline.empty() || road.centerline.back() != p) road.centerline.push_back(p);
    }
    if (road.centerline.size() >= 2) roads.push_back(std::move(road));
  }
  if (roads.empty()) throw ParseError("no drivable roads");
  return roads;
}

}  // namespace rlds::osm
