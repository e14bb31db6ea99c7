#pragma once

#include "grassmpc/design.hpp"
#include "grassmpc/reduced.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace grassmpc::io {

using Json = nlohmann::json;

/// Matrices are arrays of rows; vectors are flat arrays.
Json to_json(const Matrix& M);
Json to_json(const Vector& v);
Json to_json(const Polytope& P);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);
Polytope polytope_from_json(const Json& j);

/// Shortest round-trip representation of a double.
std::string format_double(double v);

/// Columnar CSV (x0.., z0..) plus a manifest with seed, N, L and the
/// uniform-weight offset fit.
void write_dataset(const std::filesystem::path& csv, const std::filesystem::path& manifest,
                   const DataSet& data);
/// Throws ConfigError on malformed files.
DataSet read_dataset(const std::filesystem::path& csv, const std::filesystem::path& manifest);

Json subspace_to_json(const SubspacePair& pair, const AdmissibilityCertificate& cert);
SubspacePair subspace_from_json(const Json& j);
AdmissibilityCertificate certificate_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace grassmpc::io
