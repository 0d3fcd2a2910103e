#pragma once

#include "dsii/forward.hpp"
#include "dsii/inverse.hpp"

#include <map>
#include <string>

namespace dsii {

// line-numbered config or file format problem
class FormatError : public Error {
public:
    FormatError(const std::string& file, int line, const std::string& msg);
    int line;
};

enum class FieldFormat { Cfld, Csv };

struct RunConfig {
    int grid_n = 64;
    double grid_extent = 6;
    int kgrid_n = 32;
    double kgrid_extent = 6;
    double disk_radius = 0;  // 0: empty disk
    int disk_n_boundary = 32;
    K0Policy k0_policy = K0Policy::RaySelected;
    int bspace_modes = -1;   // -1: n_boundary/2 - 1
    double solver_tol = 1e-10;
    SolverMode solver_mode = SolverMode::Auto;
    double evolve_t_max = 1;
    std::vector<double> sweep_a_list{0.25, 0.5, 0.75, 1.0};
    double scan_tau = 1e-2;
    double scan_z_extent = 2;
    int scan_nz = 9;
    int scan_nt = 3;
    FieldFormat format = FieldFormat::Cfld;
    int threads = 1;

    ComplexGrid grid() const { return make_grid(grid_extent, grid_n); }
    ComplexGrid kgrid() const { return make_grid(kgrid_extent, kgrid_n); }
    DiskSpec disk() const;
    ForwardOptions forward_options() const;
    InverseOptions inverse_options() const;
    // canonical key = value text; the fingerprint hashes it
    std::string canonical() const;
    std::string fingerprint() const;
};

// parse `key = value` lines; `#` starts a comment; DSII_THREADS overrides threads
RunConfig parse_config(const std::string& text, const std::string& name = "<config>");
RunConfig load_config(const std::string& path);
void validate_config(const RunConfig& c);

// fields: CFLD binary or CSV (x,y,re,im), chosen by extension (.csv means CSV)
void write_field(const std::string& path, const ComplexField& f);
ComplexField read_field(const std::string& path);
FieldFormat format_for(const std::string& path);
std::string field_extension(FieldFormat f);

// boundary block: SDAT0001, n_boundary, radius, t, four channels of nb^2 pairs
void write_boundary(const std::string& path, const ScatteringData& d);
void read_boundary(const std::string& path, ScatteringData& d);

// a data directory: h11..h22 fields on the k-grid (NaN where not valid), boundary.sdat,
// meta.txt with time, amplitude and the fingerprint
void write_data_dir(const std::string& dir, const ScatteringData& d, const std::string& fingerprint, FieldFormat fmt);
ScatteringData read_data_dir(const std::string& dir);

// key = value text files used for metadata and reports
std::map<std::string, std::string> read_kv(const std::string& path);

}  // namespace dsii
