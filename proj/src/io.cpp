#include "densiflow/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "densiflow/error.hpp"

namespace densiflow {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'D', 'F', 'L', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 8;

template <typename T>
void put(std::string& out, const T& v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t offset) {
    T v;
    std::memcpy(&v, in.data() + offset, sizeof(T));
    return v;
}

std::string header(const GridSpec& g) {
    std::string out(kMagic, 4);
    put(out, static_cast<std::uint32_t>(g.n));
    put(out, g.length);
    return out;
}

void append_payload(std::string& out, const ScalarField& f) {
    out.append(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(double));
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path);
    return buf.str();
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_field(const std::string& path, const ScalarField& f) {
    std::string out = header(f.grid());
    append_payload(out, f);
    write_text(path, out);
}

void write_field(const std::string& path, const VectorField2& v) {
    std::string out = header(v.grid());
    put(out, static_cast<std::uint8_t>(2));
    append_payload(out, v.x);
    append_payload(out, v.y);
    write_text(path, out);
}

FieldFile read_field(const std::string& path) {
    const std::string in = read_all(path);
    if (in.size() < kHeaderBytes || std::memcmp(in.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::FormatError, path + ": missing DFL1 header");
    const auto n = get<std::uint32_t>(in, 4);
    const auto length = get<double>(in, 8);
    GridSpec grid;
    try {
        grid = GridSpec::make(static_cast<int>(std::min<std::uint32_t>(n, 1u << 20)), length);
    } catch (const Error&) {
        throw Error(ErrorCode::FormatError, path + ": bad grid header");
    }
    const std::size_t payload = grid.size() * sizeof(double);
    FieldFile file;
    file.grid = grid;
    std::size_t offset = kHeaderBytes;
    std::size_t count = 1;
    if (in.size() == kHeaderBytes + payload) {
        count = 1;
    } else if (in.size() == kHeaderBytes + 1 + 2 * payload && get<std::uint8_t>(in, kHeaderBytes) == 2) {
        count = 2;
        offset += 1;
    } else {
        throw Error(ErrorCode::FormatError, path + ": truncated or oversized payload");
    }
    for (std::size_t c = 0; c < count; ++c) {
        std::vector<double> values(grid.size());
        std::memcpy(values.data(), in.data() + offset + c * payload, payload);
        try {
            file.components.emplace_back(grid, std::move(values));
        } catch (const Error&) {
            throw Error(ErrorCode::FormatError, path + ": non-finite samples");
        }
    }
    return file;
}

ScalarField read_scalar_field(const std::string& path) {
    FieldFile f = read_field(path);
    if (f.components.size() != 1) throw Error(ErrorCode::FormatError, path + ": expected a scalar field");
    return std::move(f.components.front());
}

VectorField2 read_vector_field(const std::string& path) {
    FieldFile f = read_field(path);
    if (f.components.size() != 2) throw Error(ErrorCode::FormatError, path + ": expected a vector field");
    return VectorField2(std::move(f.components[0]), std::move(f.components[1]));
}

nlohmann::json trajectory_meta(const Trajectory& traj, const RunConfig& cfg, const std::vector<std::string>& files) {
    nlohmann::json meta;
    meta["format"] = "DFL1";
    meta["grid"] = {{"n", traj.grid().n}, {"length", traj.grid().length}};
    meta["times"] = traj.times();
    meta["files"] = files;
    meta["steps"] = traj.diagnostics.empty() ? 0 : traj.diagnostics.size() - 1;
    meta["config"] = serialize(cfg);
    return meta;
}

void write_trajectory_meta(const std::string& path, const Trajectory& traj, const RunConfig& cfg,
                           const std::vector<std::string>& files) {
    write_report_json(path, trajectory_meta(traj, cfg, files));
}

void write_csv(const std::string& path, const std::vector<std::string>& header_names,
               const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t k = 0; k < header_names.size(); ++k) out += (k ? "," : "") + header_names[k];
    out += "\n";
    for (const auto& row : rows) {
        if (row.size() != header_names.size()) throw Error(ErrorCode::FormatError, "CSV row width differs from header");
        for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_double(row[k]);
        out += "\n";
    }
    write_text(path, out);
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 1; k < traj.diagnostics.size(); ++k) {
        const StepDiagnostics& d = traj.diagnostics[k];
        rows.push_back({d.t, d.kinetic, d.dissipation_cum, d.grad_u_inf, d.u_inf, static_cast<double>(d.cg_iters)});
    }
    write_csv(path, kDiagnosticsHeader, rows);
}

void write_report_json(const std::string& path, const nlohmann::json& report) {
    write_text(path, report.dump(2) + "\n");
}

}  // namespace densiflow
