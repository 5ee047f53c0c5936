#include <fstream>
#include <sstream>

#include <json.hpp>

#include "annofix/io.hpp"

namespace annofix {

using nlohmann::json;

namespace {

Point apply(const WorldToPixel& t, double x, double y) {
  return {t.a * x + t.b * y + t.c, t.d * x + t.e * y + t.f};
}

Polyline parse_linestring(const json& coords, const std::string& id,
                          const std::optional<WorldToPixel>& transform) {
  Polyline line;
  line.id = id;
  for (const json& c : coords) {
    if (!c.is_array() || c.size() < 2) throw IoError("GeoJSON: bad coordinate pair");
    const double x = c[0].get<double>();
    const double y = c[1].get<double>();
    const Point p = transform ? apply(*transform, x, y) : Point{x, y};
    if (!line.points.empty() && p.x == line.points.back().x && p.y == line.points.back().y) {
      continue;  // consecutive duplicates are not allowed in a Polyline
    }
    line.points.push_back(p);
  }
  if (line.points.size() < 2) throw IoError("GeoJSON: LineString '" + id + "' has < 2 points");
  return line;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("cannot write '" + path + "'");
}

std::vector<Polyline> load_geojson_lines(const std::string& path,
                                         const std::optional<WorldToPixel>& transform) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw IoError("GeoJSON parse error in '" + path + "': " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw IoError("GeoJSON '" + path + "': expected a FeatureCollection");
  }
  std::vector<Polyline> lines;
  int index = 0;
  for (const json& feature : doc.value("features", json::array())) {
    const json& geom = feature.at("geometry");
    std::string id;
    if (feature.contains("properties") && feature["properties"].is_object() &&
        feature["properties"].contains("id")) {
      const json& jid = feature["properties"]["id"];
      id = jid.is_string() ? jid.get<std::string>() : jid.dump();
    } else if (feature.contains("id")) {
      id = feature["id"].is_string() ? feature["id"].get<std::string>() : feature["id"].dump();
    } else {
      id = "line-" + std::to_string(index);
    }
    const std::string type = geom.value("type", "");
    if (type == "LineString") {
      lines.push_back(parse_linestring(geom.at("coordinates"), id, transform));
    } else if (type == "MultiLineString") {
      int part = 0;
      for (const json& coords : geom.at("coordinates")) {
        lines.push_back(parse_linestring(coords, id + "/" + std::to_string(part++), transform));
      }
    } else {
      throw IoError("GeoJSON '" + path + "': unsupported geometry type '" + type + "'");
    }
    ++index;
  }
  return lines;
}

void save_geojson_lines(const std::string& path, const std::vector<Polyline>& lines) {
  json features = json::array();
  for (const Polyline& line : lines) {
    json coords = json::array();
    for (const Point& p : line.points) coords.push_back({p.x, p.y});
    features.push_back({{"type", "Feature"},
                        {"properties", {{"id", line.id}}},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  const json doc = {{"type", "FeatureCollection"}, {"features", features}};
  write_text_file(path, doc.dump(2) + "\n");
}

WorldToPixel load_sidecar_transform(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw IoError("transform parse error in '" + path + "': " + e.what());
  }
  WorldToPixel t;
  t.a = doc.at("a").get<double>();
  t.b = doc.at("b").get<double>();
  t.c = doc.at("c").get<double>();
  t.d = doc.at("d").get<double>();
  t.e = doc.at("e").get<double>();
  t.f = doc.at("f").get<double>();
  return t;
}

}  // namespace annofix
