#include "latvol/model_io.hpp"

#include <charconv>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace latvol {

namespace {

using nlohmann::json;

json triples(const std::vector<IntVec3>& v) {
  json a = json::array();
  for (IntVec3 x : v) a.push_back({x.x, x.y, x.z});
  return a;
}

std::vector<IntVec3> read_triples(const json& a) {
  std::vector<IntVec3> v;
  v.reserve(a.size());
  for (const json& e : a) {
    if (!e.is_array() || e.size() != 3) throw std::runtime_error("model json: expected an integer triple");
    v.push_back({e[0].get<std::int64_t>(), e[1].get<std::int64_t>(), e[2].get<std::int64_t>()});
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ModelDocument to_document(const CoupledModel& model) {
  ModelDocument d;
  d.config = model.config;
  d.cauchy_born = model.cauchy_born;
  d.directions = model.directions;
  const DomainDecomposition& dd = model.domain;
  for (std::size_t s = 0; s < dd.sites.size(); ++s) {
    switch (dd.kind[s]) {
      case SiteKind::Atomistic: d.atomistic_sites.push_back(dd.sites[s]); break;
      case SiteKind::Continuum: d.continuum_sites.push_back(dd.sites[s]); break;
      case SiteKind::Dirichlet: d.dirichlet_sites.push_back(dd.sites[s]); break;
    }
  }
  d.vertices = model.mesh.vertices;
  d.tets = model.mesh.tets;
  const int nd = model.omega.num_dirs;
  for (std::size_t t = 0; t < model.mesh.tets.size(); ++t)
    for (int r = 0; r < nd; ++r) {
      const double w = model.omega(t, r);
      if (w == 0.0) continue;
      d.omega_tet.push_back(static_cast<int>(t));
      d.omega_dir.push_back(r);
      d.omega_value.push_back(w);
    }
  return d;
}

std::string write_model_json(const ModelDocument& d) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["config"] = {{"N", d.config.N},
                 {"K", d.config.K},
                 {"vacancy", d.config.vacancy},
                 {"fine_width", d.config.fine_width},
                 {"cutoff", d.config.cutoff},
                 {"cauchy_born", d.cauchy_born}};
  j["directions"] = triples(d.directions);
  j["sites"] = {{"atomistic", triples(d.atomistic_sites)},
                {"continuum", triples(d.continuum_sites)},
                {"dirichlet", triples(d.dirichlet_sites)}};
  j["vertices"] = triples(d.vertices);
  json tets = json::array();
  for (const auto& t : d.tets) tets.push_back({t[0], t[1], t[2], t[3]});
  j["tets"] = std::move(tets);
  j["omega"] = {{"tet", d.omega_tet}, {"dir", d.omega_dir}, {"value", d.omega_value}};
  return j.dump(1);
}

ModelDocument read_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model json: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"] != kModelFormatVersion)
    throw std::runtime_error("model json: unsupported format version");
  ModelDocument d;
  try {
    const json& c = j.at("config");
    d.config.N = c.at("N").get<int>();
    d.config.K = c.at("K").get<int>();
    d.config.vacancy = c.at("vacancy").get<bool>();
    d.config.fine_width = c.at("fine_width").get<int>();
    d.config.cutoff = c.at("cutoff").get<double>();
    d.cauchy_born = c.at("cauchy_born").get<bool>();
    d.directions = read_triples(j.at("directions"));
    d.atomistic_sites = read_triples(j.at("sites").at("atomistic"));
    d.continuum_sites = read_triples(j.at("sites").at("continuum"));
    d.dirichlet_sites = read_triples(j.at("sites").at("dirichlet"));
    d.vertices = read_triples(j.at("vertices"));
    for (const json& t : j.at("tets")) {
      if (!t.is_array() || t.size() != 4) throw std::runtime_error("model json: expected an index quadruple");
      d.tets.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>(), t[3].get<int>()});
    }
    d.omega_tet = j.at("omega").at("tet").get<std::vector<int>>();
    d.omega_dir = j.at("omega").at("dir").get<std::vector<int>>();
    d.omega_value = j.at("omega").at("value").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model json: ") + e.what());
  }
  if (d.omega_tet.size() != d.omega_dir.size() || d.omega_tet.size() != d.omega_value.size())
    throw std::runtime_error("model json: omega arrays differ in length");
  return d;
}

}  // namespace latvol
