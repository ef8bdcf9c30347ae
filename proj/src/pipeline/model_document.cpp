#include "vidssm/model_document.hpp"

#include "vidssm/errors.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace vidssm {

using nlohmann::json;

namespace {

json real_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json complex_matrix(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json real_vector(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json complex_vector(const Eigen::VectorXcd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("model document lacks '") + key + "'");
  return j.at(key);
}

Eigen::MatrixXd read_real_matrix(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw InputError("ragged matrix in model document");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

Eigen::MatrixXcd read_complex_matrix(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw InputError("ragged matrix in model document");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = Complex(j[i][k][0].get<double>(), j[i][k][1].get<double>());
  }
  return m;
}

Eigen::VectorXd read_real_vector(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXcd read_complex_vector(const json& j) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(j[i][0].get<double>(), j[i][1].get<double>());
  return v;
}

// Non-finite values have no JSON literal; they are stored as null.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const ModelDocument& doc) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["provenance"] = doc.provenance;
  j["embedding"] = {{"channels", doc.channels},
                    {"p", doc.p},
                    {"lag_steps", doc.lag_steps},
                    {"dt", doc.dt},
                    {"origin_offset", real_vector(doc.origin_offset)}};
  const auto& mm = doc.manifold;
  j["manifold"] = {{"n", mm.n}, {"d", mm.d}, {"m", mm.m}, {"V", real_matrix(mm.V)}, {"M", real_matrix(mm.M)},
                   {"training_ermse", mm.training_ermse}};
  const auto& rd = doc.dynamics;
  j["reduced_dynamics"] = {{"d", rd.d}, {"r", rd.r}, {"R", real_matrix(rd.R)}, {"residual_rms", rd.residual_rms}};
  const auto& nf = doc.normal_form;
  j["normal_form"] = {{"d", nf.d},
                      {"order", nf.order},
                      {"W", complex_matrix(nf.W)},
                      {"lambda", complex_vector(nf.lambda)},
                      {"H", complex_matrix(nf.H)},
                      {"N", complex_matrix(nf.N)},
                      {"T", complex_matrix(nf.T)},
                      {"resonance_tol", nf.resonance_tol},
                      {"partner", nf.partner},
                      {"max_training_amplitude", nf.max_training_amplitude},
                      {"fit_residual", nf.fit_residual},
                      {"iterations", nf.iterations}};
  if (doc.polar) {
    json pairs = json::array();
    for (const auto& p : doc.polar->pairs)
      pairs.push_back({{"gamma", real_vector(p.gamma)}, {"omega", real_vector(p.omega)}});
    j["polar"] = pairs;
  } else {
    j["polar"] = nullptr;
  }
  j["metrics"] = {{"training_ermse", number_or_null(doc.training_ermse)},
                  {"training_cnmte", doc.training_cnmte ? number_or_null(*doc.training_cnmte) : json(nullptr)}};
  j["warnings"] = doc.warnings;
  return j;
}

ModelDocument model_from_json(const json& j) {
  try {
    const int version = field(j, "schema_version").get<int>();
    if (version != kSchemaVersion)
      throw InputError("unsupported model schema version " + std::to_string(version));
    ModelDocument doc;
    doc.provenance = j.value("provenance", json::object());
    const json& e = field(j, "embedding");
    doc.channels = field(e, "channels").get<std::vector<std::string>>();
    doc.p = field(e, "p").get<int>();
    doc.lag_steps = field(e, "lag_steps").get<int>();
    doc.dt = field(e, "dt").get<double>();
    doc.origin_offset = read_real_vector(field(e, "origin_offset"));

    const json& mj = field(j, "manifold");
    auto& mm = doc.manifold;
    mm.n = field(mj, "n").get<int>();
    mm.d = field(mj, "d").get<int>();
    mm.m = field(mj, "m").get<int>();
    mm.basis = MultiIndexBasis(mm.d, 1, mm.m);
    mm.V = read_real_matrix(field(mj, "V"));
    mm.M = read_real_matrix(field(mj, "M"));
    mm.training_ermse = field(mj, "training_ermse").get<double>();
    if (mm.V.rows() != mm.n || mm.V.cols() != mm.d || mm.M.rows() != mm.n || mm.M.cols() != mm.basis.size())
      throw InputError("manifold matrices have inconsistent shapes");

    const json& rj = field(j, "reduced_dynamics");
    auto& rd = doc.dynamics;
    rd.d = field(rj, "d").get<int>();
    rd.r = field(rj, "r").get<int>();
    rd.basis = MultiIndexBasis(rd.d, 1, rd.r);
    rd.R = read_real_matrix(field(rj, "R"));
    rd.residual_rms = field(rj, "residual_rms").get<double>();
    if (rd.R.rows() != rd.d || rd.R.cols() != rd.basis.size())
      throw InputError("reduced dynamics matrix has an inconsistent shape");

    const json& nj = field(j, "normal_form");
    auto& nf = doc.normal_form;
    nf.d = field(nj, "d").get<int>();
    nf.order = field(nj, "order").get<int>();
    nf.basis = MultiIndexBasis(nf.d, 1, nf.order);
    nf.W = read_complex_matrix(field(nj, "W"));
    nf.lambda = read_complex_vector(field(nj, "lambda"));
    nf.H = read_complex_matrix(field(nj, "H"));
    nf.N = read_complex_matrix(field(nj, "N"));
    nf.T = read_complex_matrix(field(nj, "T"));
    nf.resonance_tol = field(nj, "resonance_tol").get<double>();
    nf.partner = field(nj, "partner").get<std::vector<int>>();
    nf.max_training_amplitude = field(nj, "max_training_amplitude").get<double>();
    nf.fit_residual = field(nj, "fit_residual").get<double>();
    nf.iterations = field(nj, "iterations").get<int>();
    const Eigen::Index K = nf.basis.size();
    if (nf.H.rows() != nf.d || nf.H.cols() != K || nf.N.rows() != nf.d || nf.N.cols() != K ||
        nf.T.rows() != nf.d || nf.T.cols() != K)
      throw InputError("normal form matrices have inconsistent shapes");

    const json& pj = field(j, "polar");
    if (!pj.is_null()) {
      PolarModel pm;
      for (const auto& pair : pj)
        pm.pairs.push_back(PolarPair{read_real_vector(field(pair, "gamma")), read_real_vector(field(pair, "omega"))});
      doc.polar = pm;
    }
    const json& metrics = field(j, "metrics");
    const json& te = field(metrics, "training_ermse");
    doc.training_ermse = te.is_null() ? std::numeric_limits<double>::quiet_NaN() : te.get<double>();
    const json& tc = field(metrics, "training_cnmte");
    if (!tc.is_null()) doc.training_cnmte = tc.get<double>();
    doc.warnings = j.value("warnings", std::vector<std::string>{});
    return doc;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed model document: ") + ex.what());
  }
}

void write_model_document(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model document '" + path + "'");
  out << to_json(doc).dump(2) << '\n';
}

ModelDocument read_model_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model document '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw InputError("model document '" + path + "' is not valid JSON: " + ex.what());
  }
  return model_from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return hex64(fnv1a64(s.str()));
}

std::string reproducibility_hash(const json& document) {
  json copy = document;
  if (copy.contains("provenance") && copy["provenance"].is_object()) copy["provenance"].erase("timestamp");
  return hex64(fnv1a64(copy.dump()));
}

}  // namespace vidssm
