#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "densiflow/config.hpp"
#include "densiflow/fields.hpp"
#include "densiflow/solver.hpp"

namespace densiflow {

/// Contents of a field file: one component for scalars, two for vectors.
struct FieldFile {
    GridSpec grid;
    std::vector<ScalarField> components;
};

/// "DFL1", u32 n, f64 length, n^2 f64 samples (little-endian).
void write_field(const std::string& path, const ScalarField& f);
/// Same header, then u8 count = 2 and two payloads.
void write_field(const std::string& path, const VectorField2& v);

/// Throws IoError if unreadable, FormatError on bad magic, size or payload.
FieldFile read_field(const std::string& path);
ScalarField read_scalar_field(const std::string& path);
VectorField2 read_vector_field(const std::string& path);

/// Times, stored-state files and the configuration of a run.
nlohmann::json trajectory_meta(const Trajectory& traj, const RunConfig& cfg, const std::vector<std::string>& files);
void write_trajectory_meta(const std::string& path, const Trajectory& traj, const RunConfig& cfg,
                           const std::vector<std::string>& files);

/// Writes header and rows; numbers in shortest round-trip form.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

inline const std::vector<std::string> kDiagnosticsHeader{"t", "kinetic", "dissipation_cum", "grad_u_inf", "u_inf",
                                                         "cg_iters"};

/// One row per step; the initial state is not a row.
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);

void write_report_json(const std::string& path, const nlohmann::json& report);

/// Writes text, throwing IoError on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace densiflow
