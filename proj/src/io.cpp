#include "dsii/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace dsii {

namespace fs = std::filesystem;

FormatError::FormatError(const std::string& file, int line_, const std::string& msg)
    : Error(file + (line_ > 0 ? ":" + std::to_string(line_) : "") + ": " + msg), line(line_)
{
}

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& file, int line, const std::string& key)
{
    double x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
        throw FormatError(file, line, "'" + key + "' expects a number, got '" + v + "'");
    return x;
}

int parse_int(const std::string& v, const std::string& file, int line, const std::string& key)
{
    int x = 0;
    auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw FormatError(file, line, "'" + key + "' expects an integer, got '" + v + "'");
    return x;
}

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// little-endian primitives
void put_u32(std::ostream& os, std::uint32_t v)
{
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double x)
{
    std::uint64_t v;
    std::memcpy(&v, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, const std::string& file)
{
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(file, 0, "truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is, const std::string& file)
{
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError(file, 0, "truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &v, 8);
    return x;
}

std::ofstream open_out(const std::string& path, bool binary)
{
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error("cannot write " + path);
    return os;
}

std::ifstream open_in(const std::string& path, bool binary)
{
    std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
    if (!is) throw FormatError(path, 0, "cannot open file");
    return is;
}

const char* channel_name(int e)
{
    static const char* names[4] = {"h11", "h12", "h21", "h22"};
    return names[e];
}

}  // namespace

DiskSpec RunConfig::disk() const
{
    if (disk_radius <= 0) return DiskSpec{};
    return make_disk(disk_radius, disk_n_boundary, k0_policy);
}

ForwardOptions RunConfig::forward_options() const
{
    ForwardOptions o;
    o.tol = solver_tol;
    o.mode = solver_mode;
    o.threads = threads;
    return o;
}

InverseOptions RunConfig::inverse_options() const
{
    InverseOptions o;
    o.tol = solver_tol;
    o.mode = solver_mode;
    o.modes = bspace_modes;
    o.threads = threads;
    return o;
}

std::string RunConfig::canonical() const
{
    std::ostringstream os;
    std::string alist;
    for (std::size_t i = 0; i < sweep_a_list.size(); ++i) alist += (i ? "," : "") + fmt(sweep_a_list[i]);
    os << "bspace.modes = " << bspace_modes << "\n"
       << "disk.k0_policy = " << (k0_policy == K0Policy::FixedPoint ? "fixed" : "ray") << "\n"
       << "disk.n_boundary = " << disk_n_boundary << "\n"
       << "disk.radius = " << fmt(disk_radius) << "\n"
       << "evolve.T_max = " << fmt(evolve_t_max) << "\n"
       << "grid.extent = " << fmt(grid_extent) << "\n"
       << "grid.n = " << grid_n << "\n"
       << "io.format = " << (format == FieldFormat::Csv ? "csv" : "cfld") << "\n"
       << "kgrid.extent = " << fmt(kgrid_extent) << "\n"
       << "kgrid.n = " << kgrid_n << "\n"
       << "scan.nt = " << scan_nt << "\n"
       << "scan.nz = " << scan_nz << "\n"
       << "scan.tau = " << fmt(scan_tau) << "\n"
       << "scan.z_extent = " << fmt(scan_z_extent) << "\n"
       << "solver.mode = "
       << (solver_mode == SolverMode::Dense ? "dense" : solver_mode == SolverMode::Krylov ? "krylov" : "auto") << "\n"
       << "solver.tol = " << fmt(solver_tol) << "\n"
       << "sweep.a_list = " << alist << "\n";
    // threads is left out: results do not depend on it
    return os.str();
}

std::string RunConfig::fingerprint() const
{
    // FNV-1a, 64 bit
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(const std::string& text, const std::string& name)
{
    RunConfig c;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError(name, line, "expected 'key = value'");
        std::string key = trim(s.substr(0, eq)), v = trim(s.substr(eq + 1));
        if (v.empty()) throw FormatError(name, line, "'" + key + "' has no value");
        auto num = [&] { return parse_double(v, name, line, key); };
        auto integer = [&] { return parse_int(v, name, line, key); };
        if (key == "grid.n")
            c.grid_n = integer();
        else if (key == "grid.extent")
            c.grid_extent = num();
        else if (key == "kgrid.n")
            c.kgrid_n = integer();
        else if (key == "kgrid.extent")
            c.kgrid_extent = num();
        else if (key == "disk.radius")
            c.disk_radius = num();
        else if (key == "disk.n_boundary")
            c.disk_n_boundary = integer();
        else if (key == "disk.k0_policy") {
            if (v == "fixed")
                c.k0_policy = K0Policy::FixedPoint;
            else if (v == "ray")
                c.k0_policy = K0Policy::RaySelected;
            else
                throw FormatError(name, line, "disk.k0_policy must be 'fixed' or 'ray'");
        } else if (key == "bspace.modes")
            c.bspace_modes = v == "auto" ? -1 : integer();
        else if (key == "solver.tol")
            c.solver_tol = num();
        else if (key == "solver.mode") {
            if (v == "dense")
                c.solver_mode = SolverMode::Dense;
            else if (v == "krylov")
                c.solver_mode = SolverMode::Krylov;
            else if (v == "auto")
                c.solver_mode = SolverMode::Auto;
            else
                throw FormatError(name, line, "solver.mode must be dense, krylov or auto");
        } else if (key == "evolve.T_max")
            c.evolve_t_max = num();
        else if (key == "sweep.a_list") {
            c.sweep_a_list.clear();
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ',')) c.sweep_a_list.push_back(parse_double(trim(item), name, line, key));
        } else if (key == "scan.tau")
            c.scan_tau = num();
        else if (key == "scan.z_extent")
            c.scan_z_extent = num();
        else if (key == "scan.nz")
            c.scan_nz = integer();
        else if (key == "scan.nt")
            c.scan_nt = integer();
        else if (key == "io.format") {
            if (v == "csv")
                c.format = FieldFormat::Csv;
            else if (v == "cfld")
                c.format = FieldFormat::Cfld;
            else
                throw FormatError(name, line, "io.format must be csv or cfld");
        } else if (key == "threads")
            c.threads = integer();
        else
            throw FormatError(name, line, "unknown key '" + key + "'");
        try {
            validate_config(c);
        } catch (const std::invalid_argument& e) {
            throw FormatError(name, line, e.what());
        }
    }
    if (const char* env = std::getenv("DSII_THREADS")) c.threads = parse_int(env, "DSII_THREADS", 0, "DSII_THREADS");
    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    auto is = open_in(path, false);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path);
}

void validate_config(const RunConfig& c)
{
    auto pow2 = [](int n) { return n >= 2 && (n & (n - 1)) == 0; };
    if (!pow2(c.grid_n)) throw std::invalid_argument("grid.n must be a power of two");
    if (!pow2(c.kgrid_n)) throw std::invalid_argument("kgrid.n must be a power of two");
    if (!(c.grid_extent > 0) || !(c.kgrid_extent > 0)) throw std::invalid_argument("extents must be positive");
    if (c.disk_radius < 0) throw std::invalid_argument("disk.radius must be >= 0 (0 means no disk)");
    if (c.disk_n_boundary < 4 || c.disk_n_boundary % 2) throw std::invalid_argument("disk.n_boundary must be even and >= 4");
    if (c.bspace_modes < -1 || c.bspace_modes == 0) throw std::invalid_argument("bspace.modes must be positive or auto");
    if (!(c.solver_tol > 0)) throw std::invalid_argument("solver.tol must be positive");
    if (!(c.evolve_t_max > 0)) throw std::invalid_argument("evolve.T_max must be positive");
    if (c.evolve_t_max * c.disk_radius * c.disk_radius > 300)
        throw std::invalid_argument("evolve.T_max * disk.radius^2 must not exceed 300");
    if (c.sweep_a_list.empty()) throw std::invalid_argument("sweep.a_list is empty");
    for (double a : c.sweep_a_list)
        if (!(a > 0 && a <= 1)) throw std::invalid_argument("sweep.a_list entries must lie in (0,1]");
    if (!(c.scan_tau > 0) || !(c.scan_z_extent > 0) || c.scan_nz < 1 || c.scan_nt < 1)
        throw std::invalid_argument("scan parameters must be positive");
    if (c.threads < 1) throw std::invalid_argument("threads must be positive");
}

FieldFormat format_for(const std::string& path)
{
    return fs::path(path).extension() == ".csv" ? FieldFormat::Csv : FieldFormat::Cfld;
}

std::string field_extension(FieldFormat f) { return f == FieldFormat::Csv ? ".csv" : ".cfld"; }

void write_field(const std::string& path, const ComplexField& f)
{
    const auto& g = f.grid;
    if (format_for(path) == FieldFormat::Csv) {
        auto os = open_out(path, false);
        os << "x,y,re,im\n";
        char buf[160];
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx z = g.node(i);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", z.real(), z.imag(), f.values[i].real(),
                          f.values[i].imag());
            os << buf;
        }
        return;
    }
    auto os = open_out(path, true);
    os.write("CFLD0001", 8);
    put_u32(os, static_cast<std::uint32_t>(g.n));
    put_u32(os, static_cast<std::uint32_t>(g.n));
    put_f64(os, g.extent);
    for (auto v : f.values) {
        put_f64(os, v.real());
        put_f64(os, v.imag());
    }
}

ComplexField read_field(const std::string& path)
{
    if (format_for(path) == FieldFormat::Csv) {
        auto is = open_in(path, false);
        std::string s;
        int line = 1;
        if (!std::getline(is, s) || trim(s) != "x,y,re,im") throw FormatError(path, 1, "expected header 'x,y,re,im'");
        std::vector<double> xs, ys;
        CVec vals;
        while (std::getline(is, s)) {
            ++line;
            if (trim(s).empty()) continue;
            std::stringstream ss(s);
            std::string tok;
            double v[4];
            for (int k = 0; k < 4; ++k) {
                if (!std::getline(ss, tok, ',')) throw FormatError(path, line, "expected four columns");
                v[k] = parse_double(trim(tok), path, line, "column " + std::to_string(k + 1));
            }
            xs.push_back(v[0]);
            ys.push_back(v[1]);
            vals.emplace_back(v[2], v[3]);
        }
        int n = static_cast<int>(std::lround(std::sqrt(double(vals.size()))));
        if (n < 2 || std::size_t(n) * n != vals.size()) throw FormatError(path, line, "node count is not a square");
        double extent = (xs[n - 1] - xs[0]) / 2 * n / (n - 1);
        ComplexGrid g;
        try {
            g = make_grid(extent, n);
        } catch (const std::invalid_argument& e) {
            throw FormatError(path, 0, e.what());
        }
        for (std::size_t i = 0; i < vals.size(); ++i) {
            cplx z = g.node(i);
            if (std::abs(z.real() - xs[i]) > 1e-9 * extent || std::abs(z.imag() - ys[i]) > 1e-9 * extent)
                throw FormatError(path, static_cast<int>(i) + 2, "node is not on the expected row-major grid");
        }
        return {g, vals};
    }
    auto is = open_in(path, true);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, "CFLD0001", 8) != 0) throw FormatError(path, 0, "bad magic, expected CFLD0001");
    std::uint32_t nx = get_u32(is, path), ny = get_u32(is, path);
    double extent = get_f64(is, path);
    if (nx != ny) throw FormatError(path, 0, "non-square fields are not supported");
    ComplexGrid g;
    try {
        g = make_grid(extent, static_cast<int>(nx));
    } catch (const std::invalid_argument& e) {
        throw FormatError(path, 0, e.what());
    }
    ComplexField f = make_field(g);
    for (auto& v : f.values) {
        double re = get_f64(is, path);
        double im = get_f64(is, path);
        v = {re, im};
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError(path, 0, "trailing bytes after field data");
    return f;
}

void write_boundary(const std::string& path, const ScatteringData& d)
{
    auto os = open_out(path, true);
    os.write("SDAT0001", 8);
    put_u32(os, static_cast<std::uint32_t>(d.n_boundary));
    put_f64(os, d.radius);
    put_f64(os, d.time);
    for (int e = 0; e < 4; ++e)
        for (auto v : d.boundary[e]) {
            put_f64(os, v.real());
            put_f64(os, v.imag());
        }
}

void read_boundary(const std::string& path, ScatteringData& d)
{
    auto is = open_in(path, true);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, "SDAT0001", 8) != 0) throw FormatError(path, 0, "bad magic, expected SDAT0001");
    d.n_boundary = static_cast<int>(get_u32(is, path));
    d.radius = get_f64(is, path);
    double t = get_f64(is, path);
    if (std::abs(t - d.time) > 1e-15 * std::max(1.0, std::abs(t)))
        throw FormatError(path, 0, "boundary block time differs from the diagonal data");
    const std::size_t m = static_cast<std::size_t>(d.n_boundary) * d.n_boundary;
    for (int e = 0; e < 4; ++e) {
        d.boundary[e].resize(m);
        for (auto& v : d.boundary[e]) {
            double re = get_f64(is, path);
            double im = get_f64(is, path);
            v = {re, im};
        }
    }
}

void write_data_dir(const std::string& dir, const ScatteringData& d, const std::string& fingerprint, FieldFormat ff)
{
    fs::create_directories(dir);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int e = 0; e < 4; ++e) {
        ComplexField f = make_field(d.kgrid);
        for (std::size_t i = 0; i < f.values.size(); ++i)
            f.values[i] = (d.valid.empty() || d.valid[i]) ? d.diag[e][i] : cplx{nan, nan};
        write_field((fs::path(dir) / (std::string(channel_name(e)) + field_extension(ff))).string(), f);
    }
    if (d.has_boundary()) write_boundary((fs::path(dir) / "boundary.sdat").string(), d);
    auto os = open_out((fs::path(dir) / "meta.txt").string(), false);
    os << "kind = scattering_data\n"
       << "time = " << fmt(d.time) << "\n"
       << "amplitude = " << fmt(d.amplitude) << "\n"
       << "radius = " << fmt(d.radius) << "\n"
       << "n_boundary = " << d.n_boundary << "\n"
       << "format = " << (ff == FieldFormat::Csv ? "csv" : "cfld") << "\n"
       << "fingerprint = " << fingerprint << "\n";
}

std::map<std::string, std::string> read_kv(const std::string& path)
{
    auto is = open_in(path, false);
    std::map<std::string, std::string> kv;
    std::string s;
    int line = 0;
    while (std::getline(is, s)) {
        ++line;
        auto hash = s.find('#');
        s = trim(hash == std::string::npos ? s : s.substr(0, hash));
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) throw FormatError(path, line, "expected 'key = value'");
        kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    return kv;
}

ScatteringData read_data_dir(const std::string& dir)
{
    auto meta_path = (fs::path(dir) / "meta.txt").string();
    auto kv = read_kv(meta_path);
    auto need = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw FormatError(meta_path, 0, "missing key '" + k + "'");
        return it->second;
    };
    ScatteringData d;
    d.time = parse_double(need("time"), meta_path, 0, "time");
    d.amplitude = parse_double(need("amplitude"), meta_path, 0, "amplitude");
    const auto ext = need("format") == "csv" ? FieldFormat::Csv : FieldFormat::Cfld;
    for (int e = 0; e < 4; ++e) {
        auto f = read_field((fs::path(dir) / (std::string(channel_name(e)) + field_extension(ext))).string());
        if (e == 0) {
            d.kgrid = f.grid;
            d.valid.assign(f.values.size(), 1);
        } else if (f.grid.n != d.kgrid.n || f.grid.extent != d.kgrid.extent) {
            throw FormatError(dir, 0, "channels are on different grids");
        }
        d.diag[e].resize(f.values.size());
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            if (std::isnan(f.values[i].real())) {
                d.valid[i] = 0;
                d.diag[e][i] = 0;
            } else {
                d.diag[e][i] = f.values[i];
            }
        }
    }
    d.radius = parse_double(need("radius"), meta_path, 0, "radius");
    auto bpath = fs::path(dir) / "boundary.sdat";
    if (fs::exists(bpath)) read_boundary(bpath.string(), d);
    return d;
}

}  // namespace dsii
