#include "lwrnet/network_io.hpp"

#include <fstream>

#include <json.hpp>

namespace lwrnet {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ValidationError(ValidationCode::UnknownKey, "\"" + it.key() + "\" in " + where);
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(ValidationCode::BadFile, where + " misses \"" + key + "\"");
  }
  return *it;
}

}  // namespace

std::string network_to_json(const MetricNetwork& net) {
  NetworkSpec spec = net.to_spec();
  json doc;
  doc["vertices"] = spec.vertices;
  json edges = json::array();
  for (const EdgeDef& e : spec.edges) {
    edges.push_back({{"id", e.id}, {"tail", e.tail}, {"head", e.head}, {"length", e.length}});
  }
  doc["edges"] = std::move(edges);
  json dist = json::array();
  for (const DistributionSpec& d : spec.distribution) {
    json rows = json::array();
    std::size_t n_out = d.outgoing.size();
    for (std::size_t r = 0; r < d.incoming.size(); ++r) {
      json row = json::array();
      for (std::size_t s = 0; s < n_out; ++s) row.push_back(d.coeff[r * n_out + s]);
      rows.push_back(std::move(row));
    }
    dist.push_back({{"vertex", d.vertex},
                    {"incoming", d.incoming},
                    {"outgoing", d.outgoing},
                    {"matrix", std::move(rows)}});
  }
  doc["distribution"] = std::move(dist);
  return doc.dump(2) + "\n";
}

MetricNetwork network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadFile, std::string("network JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ValidationError(ValidationCode::BadFile, "network document must be an object");
  }
  reject_unknown_keys(doc, {"vertices", "edges", "distribution"}, "network document");

  NetworkSpec spec;
  try {
    require(doc, "vertices", "network document").get_to(spec.vertices);
    for (const json& e : require(doc, "edges", "network document")) {
      reject_unknown_keys(e, {"id", "tail", "head", "length"}, "edge record");
      EdgeDef def;
      require(e, "id", "edge record").get_to(def.id);
      require(e, "tail", "edge record").get_to(def.tail);
      require(e, "head", "edge record").get_to(def.head);
      require(e, "length", "edge record").get_to(def.length);
      spec.edges.push_back(def);
    }
    if (doc.contains("distribution")) {
      for (const json& d : doc["distribution"]) {
        reject_unknown_keys(d, {"vertex", "incoming", "outgoing", "matrix"}, "distribution record");
        DistributionSpec entry;
        require(d, "vertex", "distribution record").get_to(entry.vertex);
        require(d, "incoming", "distribution record").get_to(entry.incoming);
        require(d, "outgoing", "distribution record").get_to(entry.outgoing);
        const json& rows = require(d, "matrix", "distribution record");
        if (!rows.is_array() || rows.size() != entry.incoming.size()) {
          throw ValidationError(ValidationCode::BadMatrixShape,
                                "matrix of vertex " + std::to_string(entry.vertex));
        }
        for (const json& row : rows) {
          if (!row.is_array() || row.size() != entry.outgoing.size()) {
            throw ValidationError(ValidationCode::BadMatrixShape,
                                  "matrix of vertex " + std::to_string(entry.vertex));
          }
          for (const json& v : row) entry.coeff.push_back(v.get<double>());
        }
        spec.distribution.push_back(std::move(entry));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(ValidationCode::BadFile, std::string("network JSON: ") + e.what());
  }
  return MetricNetwork::build(spec);
}

void save_network(const MetricNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError(ValidationCode::BadFile, "cannot write " + path.string());
  }
  out << network_to_json(net);
}

MetricNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError(ValidationCode::BadFile, "cannot read " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return network_from_json(text);
}

}  // namespace lwrnet
