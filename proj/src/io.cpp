#include "grassmpc/io.hpp"

#include "grassmpc/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace grassmpc::io {

Json to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Polytope& P) { return {{"G", to_json(P.G())}, {"g", to_json(P.g())}}; }

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  const auto rows = j.size();
  const auto cols = rows ? j.front().size() : 0;
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError("matrix rows differ in length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ConfigError("matrix entries must be numbers");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("vector must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("vector entries must be numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

Polytope polytope_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("G") || !j.contains("g"))
    throw ConfigError("polytope needs fields G and g");
  try {
    return Polytope(matrix_from_json(j.at("G")), vector_from_json(j.at("g")));
  } catch (const DimensionMismatch& e) {
    throw ConfigError(std::string("polytope: ") + e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_dataset(const std::filesystem::path& csv, const std::filesystem::path& manifest,
                   const DataSet& data) {
  std::ofstream out(csv);
  if (!out) throw ConfigError("cannot write " + csv.string());
  const auto n = data.X.rows(), d = data.Z.rows();
  for (Eigen::Index i = 0; i < n; ++i) out << (i ? "," : "") << 'x' << i;
  for (Eigen::Index i = 0; i < d; ++i) out << ",z" << i;
  out << '\n';
  for (int s = 0; s < data.size(); ++s) {
    for (Eigen::Index i = 0; i < n; ++i) out << (i ? "," : "") << format_double(data.X(i, s));
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(data.Z(i, s));
    out << '\n';
  }
  const OffsetFit fit = fit_offset(data);
  write_json(manifest, {{"seed", data.seed},
                        {"N", data.N},
                        {"L", data.size()},
                        {"n", n},
                        {"d", d},
                        {"csv", csv.filename().string()},
                        {"offset", {{"Gamma", to_json(fit.Gamma)}, {"xi", to_json(fit.xi)}}}});
}

DataSet read_dataset(const std::filesystem::path& csv, const std::filesystem::path& manifest) {
  const Json m = read_json(manifest);
  DataSet data;
  int n = 0, d = 0, L = 0;
  try {
    data.seed = m.at("seed").get<std::uint64_t>();
    data.N = m.at("N").get<int>();
    n = m.at("n").get<int>();
    d = m.at("d").get<int>();
    L = m.at("L").get<int>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("dataset manifest: ") + e.what());
  }
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot read " + csv.string());
  std::string line;
  std::getline(in, line);
  data.X.resize(n, L);
  data.Z.resize(d, L);
  for (int s = 0; s < L; ++s) {
    if (!std::getline(in, line)) throw ConfigError("dataset has fewer rows than its manifest");
    std::istringstream row(line);
    std::string cell;
    for (int k = 0; k < n + d; ++k) {
      if (!std::getline(row, cell, ',')) throw ConfigError("dataset row too short");
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw ConfigError("dataset entry is not a number: " + cell);
      (k < n ? data.X(k, s) : data.Z(k - n, s)) = v;
    }
  }
  return data;
}

Json subspace_to_json(const SubspacePair& pair, const AdmissibilityCertificate& cert) {
  Json witnesses = Json::array();
  for (const auto& w : cert.witnesses) witnesses.push_back(to_json(w));
  return {{"U", to_json(pair.U)},
          {"Gamma", to_json(pair.Gamma)},
          {"xi", to_json(pair.xi)},
          {"r", pair.r()},
          {"d", pair.d()},
          {"certificate",
           {{"admissible", cert.admissible},
            {"violated_vertex", cert.violated_vertex},
            {"witnesses", witnesses}}}};
}

SubspacePair subspace_from_json(const Json& j) {
  try {
    SubspacePair pair{matrix_from_json(j.at("U")), matrix_from_json(j.at("Gamma")),
                      vector_from_json(j.at("xi"))};
    if (pair.r() != j.at("r").get<int>() || pair.d() != j.at("d").get<int>())
      throw ConfigError("subspace file: r or d disagrees with U");
    return pair;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("subspace file: ") + e.what());
  }
}

AdmissibilityCertificate certificate_from_json(const Json& j) {
  AdmissibilityCertificate cert;
  try {
    const Json& c = j.at("certificate");
    cert.admissible = c.at("admissible").get<bool>();
    cert.violated_vertex = c.at("violated_vertex").get<int>();
    for (const auto& w : c.at("witnesses")) cert.witnesses.push_back(vector_from_json(w));
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("certificate: ") + e.what());
  }
  return cert;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace grassmpc::io
