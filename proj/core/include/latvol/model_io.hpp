#pragma once

#include <array>
#include <string>
#include <vector>

#include "latvol/crystal_model.hpp"

namespace latvol {

inline constexpr const char* kModelFormatVersion = "latvol-model/1";

// Flat, serializable view of a built model. Omega is stored sparsely as
// parallel arrays over its nonzero entries.
struct ModelDocument {
  ProblemConfig config;
  bool cauchy_born = false;
  std::vector<IntVec3> directions;
  std::vector<IntVec3> atomistic_sites;
  std::vector<IntVec3> continuum_sites;
  std::vector<IntVec3> dirichlet_sites;
  std::vector<IntVec3> vertices;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> omega_tet;
  std::vector<int> omega_dir;
  std::vector<double> omega_value;

  bool operator==(const ModelDocument&) const = default;
};

ModelDocument to_document(const CoupledModel& model);

// Integers are written exactly, doubles in shortest round-trip form.
std::string write_model_json(const ModelDocument& doc);
// Throws std::runtime_error on malformed input or a format-version mismatch.
ModelDocument read_model_json(const std::string& text);

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace latvol
