#pragma once

#include "vidssm/reduced_dynamics.hpp"
#include "vidssm/ssm_geometry.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vidssm {

inline constexpr int kSchemaVersion = 1;

/// Everything `fit` learns, plus what is needed to embed new data the
/// same way. Complex numbers are stored as [re, im] pairs and matrices as
/// row-major nested arrays.
struct ModelDocument {
  nlohmann::json provenance = nlohmann::json::object();

  std::vector<std::string> channels;
  int p = 1;
  int lag_steps = 1;
  double dt = 0.0;
  Eigen::VectorXd origin_offset;

  ManifoldModel manifold;
  ReducedModel dynamics;
  NormalFormModel normal_form;
  std::optional<PolarModel> polar;

  double training_ermse = 0.0;
  std::optional<double> training_cnmte;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const ModelDocument& doc);
/// Throws InputError on a missing field or an unsupported schema version.
ModelDocument model_from_json(const nlohmann::json& j);

void write_model_document(const std::string& path, const ModelDocument& doc);
ModelDocument read_model_document(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);
/// FNV-1a of a file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);
/// FNV-1a of the canonical JSON text with provenance.timestamp removed.
std::string reproducibility_hash(const nlohmann::json& document);

}  // namespace vidssm
