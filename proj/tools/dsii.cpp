#include "dsii/evolution.hpp"
#include "dsii/io.hpp"
#include "dsii/splitstep.hpp"
#include "dsii/validation.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace dsii;
namespace fs = std::filesystem;

namespace {

struct Run {
    RunConfig cfg;
    std::string out = "out";
    std::string command;
};

std::string num(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string path_in(const Run& r, const std::string& name) { return (fs::path(r.out) / name).string(); }

std::string field_name(const Run& r, const std::string& stem) { return stem + field_extension(r.cfg.format); }

void write_manifest(const Run& r, const std::vector<std::pair<std::string, std::string>>& extra = {})
{
    fs::create_directories(r.out);
    std::ofstream os(path_in(r, "manifest.txt"));
    os << "command = " << r.command << "\n"
       << "fingerprint = " << r.cfg.fingerprint() << "\n";
    for (const auto& [k, v] : extra) os << k << " = " << v << "\n";
    os << "# config\n" << r.cfg.canonical();
}

// `gaussian:a[:w]` gives a exp(-|z|^2/w^2) on the config grid, anything else is a field file
ComplexField load_potential(const Run& r, const std::string& arg)
{
    if (arg.rfind("gaussian:", 0) == 0) {
        std::vector<double> p;
        std::stringstream ss(arg.substr(9));
        std::string item;
        while (std::getline(ss, item, ':')) {
            try {
                std::size_t used = 0;
                p.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw FormatError(arg, 0, "bad gaussian parameter '" + item + "'");
            }
        }
        if (p.empty() || p.size() > 2 || (p.size() == 2 && !(p[1] > 0)))
            throw FormatError(arg, 0, "expected gaussian:a or gaussian:a:width");
        const double w = p.size() == 2 ? p[1] : 1.0;
        auto f = make_field(r.cfg.grid());
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = p[0] * std::exp(-std::norm(f.grid.node(i)) / (w * w));
        return f;
    }
    return read_field(arg);
}

// potentials are assumed negligible near the box edge
void truncation_warning(const ComplexField& q)
{
    const int n = q.grid.n;
    double edge = 0, mx = max_abs(q.values);
    for (int i = 0; i < n; ++i)
        for (std::size_t j : {std::size_t(i), std::size_t(n - 1) * n + i, std::size_t(i) * n, std::size_t(i) * n + n - 1})
            edge = std::max(edge, std::abs(q.values[j]));
    if (mx > 0 && edge > 1e-10 * mx)
        std::cerr << "warning: potential is " << edge / mx << " of its maximum on the box edge\n";
}

DiskSpec disk_for(const Run& r, const ScatteringData& d)
{
    if (!d.has_boundary() || d.radius <= 0) return DiskSpec{};
    return make_disk(d.radius, d.n_boundary, r.cfg.k0_policy);
}

ScatteringData forward_data(const Run& r, const ComplexField& q)
{
    DiagReport rep;
    auto disk = r.cfg.disk();
    auto d = scattering_diag(q, r.cfg.kgrid(), disk.empty() ? 0.0 : disk.radius, r.cfg.forward_options(), &rep);
    if (!disk.empty()) scattering_boundary(q, disk, d, r.cfg.forward_options());
    if (rep.failed) std::cerr << "warning: " << rep.failed << " k-nodes failed and are marked invalid\n";
    return d;
}

double rel_l2(const CVec& a, const CVec& b)
{
    double s = 0, n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::norm(a[i] - b[i]);
        n += std::norm(b[i]);
    }
    return n > 0 ? std::sqrt(s / n) : std::sqrt(s);
}

void write_reports(const std::string& path, const ComplexGrid& g, const Reconstruction& rec)
{
    std::ofstream os(path);
    os << "x,y,sigma_min,norm,residual,iterations,flag\n";
    for (std::size_t i = 0; i < rec.reports.size(); ++i) {
        const auto& s = rec.reports[i];
        cplx z = g.node(i);
        os << num(z.real()) << "," << num(z.imag()) << "," << num(s.sigma_min_estimate) << "," << num(s.norm_estimate) << ","
           << num(s.residual) << "," << s.iterations << "," << int(s.condition_flag) << "\n";
    }
}

Reconstruction invert_data(const Run& r, const ScatteringData& d, double t)
{
    auto rec = reconstruct(d, r.cfg.grid(), t, disk_for(r, d), r.cfg.inverse_options());
    fs::create_directories(r.out);
    write_field(path_in(r, field_name(r, "q")), rec.q);
    write_field(path_in(r, field_name(r, "phi")), rec.phi);
    auto mask = make_field(rec.q.grid);
    for (std::size_t i = 0; i < mask.values.size(); ++i) mask.values[i] = rec.mask[i];
    write_field(path_in(r, field_name(r, "mask")), mask);
    write_reports(path_in(r, "reports.csv"), rec.q.grid, rec);
    return rec;
}

int cmd_forward(const Run& r, const std::string& pot)
{
    auto q = load_potential(r, pot);
    truncation_warning(q);
    auto d = forward_data(r, q);
    write_data_dir(r.out, d, r.cfg.fingerprint(), r.cfg.format);
    write_field(path_in(r, field_name(r, "potential")), q);
    write_manifest(r, {{"potential", pot}});
    return 0;
}

int cmd_evolve(const Run& r, const std::string& dir, double t)
{
    auto d = evolve_h(read_data_dir(dir), t);
    write_data_dir(r.out, d, r.cfg.fingerprint(), r.cfg.format);
    write_manifest(r, {{"data", dir}, {"t", num(t)}});
    return 0;
}

int cmd_invert(const Run& r, const std::string& dir, double t)
{
    auto d = read_data_dir(dir);
    auto rec = invert_data(r, d, t);
    std::size_t flagged = std::count(rec.mask.begin(), rec.mask.end(), std::uint8_t{1});
    write_manifest(r, {{"data", dir}, {"t", num(t)}, {"masked_nodes", std::to_string(flagged)}});
    return 0;
}

int cmd_roundtrip(const Run& r, const std::string& pot, double tol)
{
    auto q = load_potential(r, pot);
    truncation_warning(q);
    auto d = forward_data(r, q);
    auto rec = invert_data(r, d, 0.0);
    const double err = rel_l2(rec.q.values, q.values);
    const bool pass = err <= tol;
    write_manifest(r, {{"potential", pot}, {"rel_l2", num(err)}, {"tolerance", num(tol)}, {"pass", pass ? "1" : "0"}});
    std::cout << "roundtrip rel_l2 = " << num(err) << (pass ? " PASS" : " FAIL") << "\n";
    return pass ? 0 : 2;
}

int cmd_scan_exceptional(const Run& r, const std::string& pot, double amplitude, int per_side)
{
    auto q = load_potential(r, pot);
    for (auto& v : q.values) v *= amplitude;
    auto ks = k_region(r.cfg.kgrid_extent, per_side);
    auto fo = r.cfg.forward_options();
    fo.want_sigma = true;
    auto scan = exceptional_scan(q, ks, 0, fo);
    fs::create_directories(r.out);
    std::ofstream os(path_in(r, "exceptional.csv"));
    os << "kx,ky,sigma_min,flagged\n";
    std::vector<std::uint8_t> flag(ks.size(), 0);
    for (auto i : scan.flagged) flag[i] = 1;
    for (std::size_t i = 0; i < ks.size(); ++i)
        os << num(ks[i].real()) << "," << num(ks[i].imag()) << "," << num(scan.sigma_min[i]) << "," << int(flag[i]) << "\n";
    write_manifest(r, {{"potential", pot},
                       {"amplitude", num(amplitude)},
                       {"tau", num(scan.tau)},
                       {"flagged", std::to_string(scan.flagged.size())},
                       {"covering_radius", num(scan.radius)}});
    return 0;
}

int cmd_scan_blowup(const Run& r, const std::string& pot, double t_max)
{
    auto q = load_potential(r, pot);
    auto d = forward_data(r, q);
    BlowupBox box;
    box.z_extent = r.cfg.scan_z_extent;
    box.nz = r.cfg.scan_nz;
    box.nt = r.cfg.scan_nt;
    box.t_max = t_max;
    auto map = blowup_scan(d, box, disk_for(r, d), r.cfg.scan_tau, r.cfg.inverse_options());
    fs::create_directories(r.out);
    std::ofstream os(path_in(r, "blowup.csv"));
    os << "t,x,y,sigma_rel,flagged\n";
    const std::size_t per = static_cast<std::size_t>(box.nz) * box.nz;
    for (int it = 0; it < box.nt; ++it)
        for (int iy = 0; iy < box.nz; ++iy)
            for (int ix = 0; ix < box.nz; ++ix) {
                std::size_t c = it * per + static_cast<std::size_t>(iy) * box.nz + ix;
                cplx z = map.node(ix, iy);
                os << num(map.time(it)) << "," << num(z.real()) << "," << num(z.imag()) << "," << num(map.sigma[c]) << ","
                   << int(map.flagged[c]) << "\n";
            }
    std::string comps;
    for (std::size_t i = 0; i < map.components.size(); ++i) comps += (i ? "," : "") + std::to_string(map.components[i]);
    write_manifest(r, {{"potential", pot},
                       {"flagged", std::to_string(map.flag_count())},
                       {"components", comps},
                       {"status", map.inconclusive ? "inconclusive" : "conclusive"}});
    if (map.inconclusive) {
        std::cout << "blow-up scan: Inconclusive (flagged cells touch the scan box)\n";
        return 2;
    }
    std::cout << "blow-up scan: " << map.flag_count() << " flagged cells\n";
    return 0;
}

int cmd_simulate(const Run& r, const std::string& pot, double t_end, double dt, int every)
{
    auto q = load_potential(r, pot);
    auto tr = simulate(q, t_end, dt, {}, every);
    fs::create_directories(r.out);
    std::ofstream ts(path_in(r, "times.csv"));
    ts << "frame,t\n";
    for (std::size_t i = 0; i < tr.frames.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "frame_%04zu", i);
        write_field(path_in(r, field_name(r, stem)), tr.frames[i]);
        ts << i << "," << num(tr.times[i]) << "\n";
    }
    write_manifest(r, {{"potential", pot}, {"t_end", num(t_end)}, {"dt", num(dt)}});
    return 0;
}

int cmd_compare(const Run& r, const std::string& a, const std::string& b)
{
    auto fa = read_field(a), fb = read_field(b);
    if (fa.grid.n != fb.grid.n || std::abs(fa.grid.extent - fb.grid.extent) > 1e-12 * fb.grid.extent)
        throw FormatError(a, 0, "fields live on different grids");
    double dmax = 0;
    for (std::size_t i = 0; i < fa.values.size(); ++i) dmax = std::max(dmax, std::abs(fa.values[i] - fb.values[i]));
    const double ref = max_abs(fb.values);
    const double l2 = rel_l2(fa.values, fb.values);
    std::cout << "rel_l2 = " << num(l2) << "\nmax_abs = " << num(dmax) << "\nrel_max = " << num(ref > 0 ? dmax / ref : dmax)
              << "\n";
    write_manifest(r, {{"a", a}, {"b", b}, {"rel_l2", num(l2)}, {"max_abs", num(dmax)}});
    return 0;
}

// property verdicts on a directory written by forward (optionally followed by invert into the same place)
int cmd_validate(const Run& r, const std::string& dir)
{
    auto d = read_data_dir(dir);
    struct Verdict {
        std::string name;
        double value, tol;
    };
    std::vector<Verdict> v;
    v.push_back({"symmetry", symmetry_check(d), 1e-10});
    // evolution invariants at t = 0.5 on the stored nodes
    auto e = evolve_h(d, 0.5);
    double inv = 0, scale = 0;
    for (std::size_t i = 0; i < d.diag[E11].size(); ++i) {
        if (!d.valid.empty() && !d.valid[i]) continue;
        inv = std::max({inv, std::abs(e.diag[E11][i] - d.diag[E11][i]), std::abs(e.diag[E22][i] - d.diag[E22][i]),
                        std::abs(std::abs(e.diag[E12][i]) - std::abs(d.diag[E12][i]))});
        for (int c = 0; c < 4; ++c) scale = std::max(scale, std::abs(d.diag[c][i]));
    }
    v.push_back({"evolution_invariants", scale > 0 ? inv / scale : inv, 1e-14});
    for (const char* stem : {"potential.cfld", "potential.csv"}) {
        auto p = fs::path(dir) / stem;
        if (!fs::exists(p)) continue;
        auto q = read_field(p.string());
        auto fo = r.cfg.forward_options();
        fo.decay_tol = 1e-3;
        auto du = duality_check(q, d, fo, std::max(1, d.kgrid.n / 8));
        v.push_back({"duality_diag", du.diag, 1e-2});
        if (d.has_boundary()) v.push_back({"duality_boundary", du.boundary, 1e-2});
        break;
    }
    for (const char* stem : {"q.cfld", "q.csv"}) {
        auto p = fs::path(dir) / stem;
        if (!fs::exists(p) || d.time != 0) continue;
        auto q = read_field(p.string());
        auto fo = r.cfg.forward_options();
        fo.decay_tol = 1e-3;
        v.push_back({"reconstruction_duality", duality_check(q, d, fo, std::max(1, d.kgrid.n / 8)).diag, 1e-2});
        break;
    }
    fs::create_directories(r.out);
    std::ofstream os(path_in(r, "verdicts.txt"));
    bool all = true;
    for (const auto& x : v) {
        bool pass = x.value <= x.tol;
        all = all && pass;
        std::string line = x.name + " " + num(x.value) + " <= " + num(x.tol) + (pass ? " PASS" : " FAIL");
        os << line << "\n";
        std::cout << line << "\n";
    }
    write_manifest(r, {{"run", dir}, {"pass", all ? "1" : "0"}});
    return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"numerical inverse scattering for the focusing Davey-Stewartson II system"};
    app.require_subcommand(1);
    std::string config_path, out = "out";
    app.add_option("-c,--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out, "output directory");

    std::string a1, a2;
    double t = 0, amplitude = 1, t_end = 0, dt = 1e-3, tol = 5e-3, t_max = -1;
    int per_side = 16, every = 0;

    auto* fwd = app.add_subcommand("forward", "scattering data of a potential");
    fwd->add_option("potential", a1, "field file or gaussian:a[:width]")->required();
    auto* evo = app.add_subcommand("evolve", "evolve a data directory by t");
    evo->add_option("data", a1)->required();
    evo->add_option("--t", t)->required();
    auto* inv = app.add_subcommand("invert", "reconstruct q and phi at time t");
    inv->add_option("data", a1)->required();
    inv->add_option("--t", t)->required();
    auto* rt = app.add_subcommand("roundtrip", "forward then invert at t = 0");
    rt->add_option("potential", a1)->required();
    rt->add_option("--tol", tol, "relative L2 tolerance");
    auto* sx = app.add_subcommand("scan-exceptional", "sigma_min of the forward problem over a k-square");
    sx->add_option("potential", a1)->required();
    sx->add_option("--amplitude", amplitude);
    sx->add_option("--per-side", per_side)->check(CLI::PositiveNumber);
    auto* sb = app.add_subcommand("scan-blowup", "near-singularity map of I + T over (z, t)");
    sb->add_option("potential", a1)->required();
    sb->add_option("--t-max", t_max);
    auto* sim = app.add_subcommand("simulate", "split-step reference trajectory");
    sim->add_option("potential", a1)->required();
    sim->add_option("--t-end", t_end)->required();
    sim->add_option("--dt", dt);
    sim->add_option("--every", every, "frame stride in steps; 0 keeps the endpoints");
    auto* cmp = app.add_subcommand("compare", "error metrics between two fields");
    cmp->add_option("a", a1)->required();
    cmp->add_option("b", a2)->required();
    auto* val = app.add_subcommand("validate", "property verdicts on a run directory");
    val->add_option("run", a1)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        Run r;
        if (!config_path.empty()) r.cfg = load_config(config_path);
        r.out = out;
        r.command = app.get_subcommands().front()->get_name();
        if (fwd->parsed()) return cmd_forward(r, a1);
        if (evo->parsed()) return cmd_evolve(r, a1, t);
        if (inv->parsed()) return cmd_invert(r, a1, t);
        if (rt->parsed()) return cmd_roundtrip(r, a1, tol);
        if (sx->parsed()) return cmd_scan_exceptional(r, a1, amplitude, per_side);
        if (sb->parsed()) return cmd_scan_blowup(r, a1, t_max > 0 ? t_max : r.cfg.evolve_t_max);
        if (sim->parsed()) return cmd_simulate(r, a1, t_end, dt, every);
        if (cmp->parsed()) return cmd_compare(r, a1, a2);
        if (val->parsed()) return cmd_validate(r, a1);
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const MissingBoundaryBlock& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NoConvergence& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
