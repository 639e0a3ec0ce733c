#pragma once

#include "rodlimit/config.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace rodlimit {

inline constexpr const char* kSchemaVersion = "1.0";

nlohmann::json to_json(const Vec3& v);
nlohmann::json to_json(const Mat3& M);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const NormTable& n);
nlohmann::json to_json(const Energy3D& e);
nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const JunctionReport& r);

// Deterministic text forms: two-space indented JSON with a trailing newline,
// CSV numbers at 17 significant digits.
std::string dump_json(const nlohmann::json& j);
std::string csv_number(double x);

void write_solve_nodes_csv(std::ostream& out, const CenterlineField& V, const RotationField& R);
void write_gamma_csv(std::ostream& out, const RotationField& R, const Skeleton& sk);
void write_kappa1_csv(std::ostream& out, const Kappa1Solution& sol);
void write_stations_csv(std::ostream& out, const RodFieldSamples& samples, const DecompositionResult& res);
void write_samples_csv(std::ostream& out, const RodFieldSamples& samples, const Skeleton& sk);
void write_scaling_csv(std::ostream& out, const ScalingReport& r);

// Reads values written by write_samples_csv back onto a sample layout with
// the same skeleton, delta and grid.
void read_samples_csv(std::istream& in, RodFieldSamples& samples, const Skeleton& sk);

}  // namespace rodlimit
