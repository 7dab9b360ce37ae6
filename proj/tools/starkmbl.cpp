// starkmbl CLI: configuration-driven runs of the simulator library with
// bit-stable CSV/JSON output. Subcommands: levels, quench, deer, quad,
// stability, sweff, sweep.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "starkmbl/starkmbl.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace starkmbl;

namespace {

struct RunContext {
    json config;
    std::uint64_t seed = 0;
    int workers = 1;
    fs::path out_dir;
    double j0_khz = 0.25;
};

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
    throw config_error("config" + where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) schema_fail(where, "expected an object");
}

/// Strict schema step: all of `required` present, nothing outside
/// required+optional allowed.
void check_keys(const json& j, const std::string& where, std::set<std::string> required,
                std::set<std::string> optional) {
    require_object(j, where);
    for (const std::string& k : required)
        if (!j.contains(k)) schema_fail(where, "missing required key \"" + k + "\"");
    for (const auto& [k, v] : j.items())
        if (!required.count(k) && !optional.count(k))
            schema_fail(where, "unknown key \"" + k + "\"");
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) schema_fail(where, "expected a number");
    return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) schema_fail(where, "expected an integer");
    return j.get<int>();
}

/// Energy in J0 units; {"khz": x} converts at the CLI boundary.
double parse_energy(const json& j, const RunContext& ctx, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    check_keys(j, where, {"khz"}, {});
    return khz_to_j0(get_number(j["khz"], where + ".khz"), ctx.j0_khz);
}

/// Duration in tJ0; {"us": x} converts at the CLI boundary.
double parse_duration(const json& j, const RunContext& ctx, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    check_keys(j, where, {"us"}, {});
    return us_to_tj0(get_number(j["us"], where + ".us"), ctx.j0_khz);
}

int parse_chain(const json& cfg) {
    check_keys(cfg.at("chain"), "/chain", {"n"}, {});
    const int n = get_int(cfg["chain"]["n"], "/chain/n");
    return ChainConfig(n).n;
}

CouplingMatrix parse_couplings(const json& cfg, int n) {
    const json& j = cfg.at("couplings");
    require_object(j, "/couplings");
    const std::string type = j.value("type", "");
    if (type == "power_law") {
        check_keys(j, "/couplings", {"type", "alpha"}, {});
        return power_law_couplings(n, get_number(j["alpha"], "/couplings/alpha"));
    }
    if (type == "file") {
        check_keys(j, "/couplings", {"type", "path"}, {});
        CouplingMatrix c = load_couplings(j["path"].get<std::string>());
        if (c.n != n) schema_fail("/couplings/path", "file is for n = " + std::to_string(c.n));
        return c;
    }
    schema_fail("/couplings/type", "expected \"power_law\" or \"file\"");
}

FieldSpec parse_field(const json& cfg, const RunContext& ctx, int n) {
    const json& j = cfg.at("field");
    require_object(j, "/field");
    const std::string type = j.value("type", "");
    if (type == "linear") {
        check_keys(j, "/field", {"type", "bz0", "g"}, {});
        const double g = parse_energy(j["g"], ctx, "/field/g");
        double bz0;
        if (j["bz0"].is_string() && j["bz0"].get<std::string>() == "experimental_scaling")
            bz0 = experimental_bias_scaling(g);
        else
            bz0 = parse_energy(j["bz0"], ctx, "/field/bz0");
        return LinearFieldSpec{bz0, g};
    }
    if (type == "quadratic") {
        check_keys(j, "/field", {"type", "bz0", "gamma"}, {"center_offset"});
        return QuadraticFieldSpec{parse_energy(j["bz0"], ctx, "/field/bz0"),
                                  parse_energy(j["gamma"], ctx, "/field/gamma"),
                                  j.value("center_offset", 0.0)};
    }
    if (type == "file") {
        check_keys(j, "/field", {"type", "path"}, {});
        std::ifstream in(j["path"].get<std::string>());
        if (!in) schema_fail("/field/path", "cannot open file");
        std::vector<double> bz;
        double x;
        while (in >> x) bz.push_back(x);
        if (static_cast<int>(bz.size()) != n)
            schema_fail("/field/path", "expected " + std::to_string(n) + " values");
        return FieldProfile(std::move(bz));
    }
    schema_fail("/field/type", "expected \"linear\", \"quadratic\" or \"file\"");
}

KrylovSettings parse_krylov(const json& cfg) {
    KrylovSettings s;
    if (!cfg.contains("krylov")) return s;
    const json& j = cfg["krylov"];
    check_keys(j, "/krylov", {}, {"subspace_dim", "tolerance", "max_substep"});
    if (j.contains("subspace_dim")) s.subspace_dim = get_int(j["subspace_dim"], "/krylov/subspace_dim");
    if (j.contains("tolerance")) s.tolerance = get_number(j["tolerance"], "/krylov/tolerance");
    if (j.contains("max_substep")) s.max_substep = get_number(j["max_substep"], "/krylov/max_substep");
    s.validate();
    return s;
}

TimeGrid parse_grid(const json& cfg, const char* key, TimeGrid fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& j = cfg[key];
    check_keys(j, std::string("/") + key, {}, {"t_max", "n_points"});
    TimeGrid g = fallback;
    if (j.contains("t_max")) g.t_max = get_number(j["t_max"], "t_max");
    if (j.contains("n_points")) g.n_points = get_int(j["n_points"], "n_points");
    g.validate();
    return g;
}

SpinPattern parse_pattern(const json& j, int n, const std::string& where) {
    if (!j.is_string()) schema_fail(where, "expected a pattern string");
    const std::string s = j.get<std::string>();
    SpinPattern p;
    if (s == "neel")
        p = SpinPattern::neel(n);
    else if (s == "two_block")
        p = SpinPattern::two_block(n);
    else if (s == "three_block")
        p = SpinPattern::three_block(n);
    else
        p = SpinPattern(s);
    p.validate_for(n);
    return p;
}

std::pair<double, double> parse_window(const json& cfg, std::pair<double, double> fallback) {
    if (!cfg.contains("window")) return fallback;
    const json& j = cfg["window"];
    if (!j.is_array() || j.size() != 2) schema_fail("/window", "expected [t_lo, t_hi]");
    return {get_number(j[0], "/window[0]"), get_number(j[1], "/window[1]")};
}

NoiseModel parse_noise(const json& cfg, const RunContext& ctx) {
    NoiseModel m;
    m.sigma_bz0 = khz_to_j0(0.6, ctx.j0_khz);
    m.seed = ctx.seed;
    if (!cfg.contains("noise")) {
        m.n_samples = 0; // marker: no noise block
        return m;
    }
    const json& j = cfg["noise"];
    check_keys(j, "/noise", {},
               {"init_rotation_angle", "sigma_bz0", "sigma_g_frac", "sigma_local_frac",
                "n_samples", "archive_instances"});
    if (j.contains("init_rotation_angle"))
        m.init_rotation_angle = get_number(j["init_rotation_angle"], "/noise/init_rotation_angle");
    if (j.contains("sigma_bz0")) m.sigma_bz0 = parse_energy(j["sigma_bz0"], ctx, "/noise/sigma_bz0");
    if (j.contains("sigma_g_frac")) m.sigma_g_frac = get_number(j["sigma_g_frac"], "/noise/sigma_g_frac");
    if (j.contains("sigma_local_frac"))
        m.sigma_local_frac = get_number(j["sigma_local_frac"], "/noise/sigma_local_frac");
    if (j.contains("n_samples")) m.n_samples = get_int(j["n_samples"], "/noise/n_samples");
    m.validate();
    return m;
}

std::vector<std::string> provenance(const RunContext& ctx, const std::string& command) {
    return {"starkmbl " + command, "config: " + ctx.config.dump(), "seed: " + std::to_string(ctx.seed)};
}

json summary_base(const RunContext& ctx) {
    return json{{"config", ctx.config}, {"seed", ctx.seed}};
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file " + path.string());
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- levels --

void cmd_levels(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"chain", "couplings", "field"}, {"spectrum", "seed", "units"});
    const int n = parse_chain(cfg);
    const CouplingMatrix c = parse_couplings(cfg, n);
    const FieldProfile f = materialize(parse_field(cfg, ctx, n), n);

    std::string mode = "full";
    int mz = 0;
    LevelStatsOptions opt;
    bool write_eigs = false;
    if (cfg.contains("spectrum")) {
        const json& j = cfg["spectrum"];
        check_keys(j, "/spectrum", {},
                   {"mode", "mz", "n_bins", "inner_fraction", "degeneracy_tol", "write_eigenvalues"});
        mode = j.value("mode", "full");
        if (j.contains("mz")) mz = get_int(j["mz"], "/spectrum/mz");
        if (j.contains("n_bins")) opt.n_bins = get_int(j["n_bins"], "/spectrum/n_bins");
        if (j.contains("inner_fraction"))
            opt.inner_fraction = get_number(j["inner_fraction"], "/spectrum/inner_fraction");
        if (j.contains("degeneracy_tol"))
            opt.degeneracy_tol = get_number(j["degeneracy_tol"], "/spectrum/degeneracy_tol");
        write_eigs = j.value("write_eigenvalues", false);
    }

    LevelStatsReport rep;
    if (mode == "full") {
        rep = level_stats(build_ising(c, f), opt);
    } else if (mode == "xy_sector") {
        rep = level_stats(build_xy_sector(c, f, mz), opt);
    } else if (mode == "parity") {
        const SparseOperator h = build_ising(c, f);
        std::vector<basis_t> even, odd;
        for (basis_t b = 0; b < h.dimension; ++b)
            (std::popcount(b) % 2 == 0 ? even : odd).push_back(b);
        const LevelStatsReport re = level_stats_from_eigenvalues(
            dense_eigenvalues(restrict_to_indices(h, even)), opt);
        const LevelStatsReport ro = level_stats_from_eigenvalues(
            dense_eigenvalues(restrict_to_indices(h, odd)), opt);
        rep.eigenvalues = re.eigenvalues;
        rep.eigenvalues.insert(rep.eigenvalues.end(), ro.eigenvalues.begin(), ro.eigenvalues.end());
        std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());
        rep.r_values = re.r_values;
        rep.r_values.insert(rep.r_values.end(), ro.r_values.begin(), ro.r_values.end());
        rep.excluded_degenerate = re.excluded_degenerate + ro.excluded_degenerate;
        rep.mean_r = mean(rep.r_values);
        rep.histogram = r_histogram(rep.r_values, opt.n_bins);
    } else {
        schema_fail("/spectrum/mode", "expected \"full\", \"parity\" or \"xy_sector\"");
    }

    json summary = summary_base(ctx);
    summary["mode"] = mode;
    summary["mean_r"] = rep.mean_r;
    summary["n_eigenvalues"] = rep.eigenvalues.size();
    summary["n_gap_ratios"] = rep.r_values.size();
    summary["excluded_degenerate"] = rep.excluded_degenerate;
    write_json_file(ctx.out_dir / "levels.json", summary);
    write_histogram_csv(ctx.out_dir / "levels_histogram.csv", rep.histogram,
                        provenance(ctx, "levels"));
    write_field_csv(ctx.out_dir / "field_profile.csv", f, provenance(ctx, "levels"));
    if (write_eigs) {
        CsvWriter w(ctx.out_dir / "levels_eigenvalues.csv", provenance(ctx, "levels"),
                    std::vector<std::string>{"eigenvalue"});
        for (double e : rep.eigenvalues) w.row(std::vector<double>{e});
    }
}

// ---------------------------------------------------------------- quench --

QuenchConfig quench_config_from(const json& cfg, const RunContext& ctx) {
    QuenchConfig qc;
    qc.n = parse_chain(cfg);
    qc.couplings = parse_couplings(cfg, qc.n);
    qc.field = parse_field(cfg, ctx, qc.n);
    qc.pattern = parse_pattern(cfg.at("initial_pattern"), qc.n, "/initial_pattern");
    qc.grid = parse_grid(cfg, "grid", TimeGrid{7.0, 40});
    std::tie(qc.window_lo, qc.window_hi) = parse_window(cfg, {5.0, 7.0});
    qc.krylov = parse_krylov(cfg);
    if (cfg.contains("evolution")) {
        const json& j = cfg["evolution"];
        check_keys(j, "/evolution", {"mode"}, {"dt1", "dt2"});
        const std::string mode = j["mode"].get<std::string>();
        if (mode == "trotter") {
            qc.mode = EvolutionMode::trotter;
            qc.trotter.dt1 = parse_duration(j.at("dt1"), ctx, "/evolution/dt1");
            qc.trotter.dt2 = parse_duration(j.at("dt2"), ctx, "/evolution/dt2");
        } else if (mode != "continuous") {
            schema_fail("/evolution/mode", "expected \"continuous\" or \"trotter\"");
        }
    }
    return qc;
}

void cmd_quench(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "",
               {"chain", "couplings", "field", "initial_pattern"},
               {"grid", "window", "evolution", "krylov", "noise", "seed", "units"});
    QuenchConfig qc = quench_config_from(cfg, ctx);
    const NoiseModel noise = parse_noise(cfg, ctx);

    json summary = summary_base(ctx);
    summary["pattern"] = qc.pattern.bits;
    write_field_csv(ctx.out_dir / "field_profile.csv", materialize(qc.field, qc.n),
                    provenance(ctx, "quench"));
    if (noise.n_samples == 0) {
        const QuenchResult res = run_quench(qc);
        write_site_series_csv(ctx.out_dir / "quench_sites.csv", res.sites,
                              provenance(ctx, "quench"));
        write_scalar_series_csv(ctx.out_dir / "quench_imbalance.csv", res.imbalance.series,
                                provenance(ctx, "quench"), "imbalance");
        summary["late_time_imbalance"] = res.imbalance.late_time_mean;
        summary["window"] = {qc.window_lo, qc.window_hi};
    } else {
        const bool archive = cfg["noise"].value("archive_instances", false);
        const NoiseAverageResult avg = noise_average(
            noise,
            [&](int, GaussianRng& rng) {
                const NoiseInstance inst = sample_instance(noise, qc.field, qc.n, qc.pattern, rng);
                const QuenchResult r = run_quench_instance(qc, inst.field, inst.psi0);
                return InstanceSeries{r.imbalance.series, r.sites.sz};
            },
            {.keep_instances = archive, .workers = ctx.workers});

        TimeSeries mean_series{avg.t, avg.mean};
        TimeSeries err_series{avg.t, avg.std_error};
        write_scalar_series_csv(ctx.out_dir / "quench_imbalance.csv", mean_series,
                                provenance(ctx, "quench"), "imbalance", &err_series);
        SiteSeries sites{avg.t, avg.site_mean};
        write_site_series_csv(ctx.out_dir / "quench_sites.csv", sites, provenance(ctx, "quench"));
        if (archive) {
            std::vector<std::string> cols{"t_j0"};
            for (int i = 0; i < noise.n_samples; ++i) cols.push_back("instance_" + std::to_string(i));
            CsvWriter w(ctx.out_dir / "quench_instances.csv", provenance(ctx, "quench"), cols);
            for (std::size_t p = 0; p < avg.t.size(); ++p) {
                std::vector<double> row{avg.t[p]};
                for (const auto& inst : avg.instance_values) row.push_back(inst[p]);
                w.row(row);
            }
        }
        summary["late_time_imbalance"] =
            late_time_average(mean_series, qc.window_lo, qc.window_hi);
        summary["window"] = {qc.window_lo, qc.window_hi};
        summary["n_samples"] = noise.n_samples;
    }
    write_json_file(ctx.out_dir / "quench_summary.json", summary);
}

// ------------------------------------------------------------------ deer --

void cmd_deer(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"chain", "couplings", "field"},
               {"probe_site", "region_offset", "region_size", "pulse_axis", "grid", "window",
                "krylov", "noise", "seed", "units"});
    DeerConfig dc;
    dc.n = parse_chain(cfg);
    dc.couplings = parse_couplings(cfg, dc.n);
    dc.field = parse_field(cfg, ctx, dc.n);
    if (cfg.contains("probe_site")) dc.probe_site = get_int(cfg["probe_site"], "/probe_site");
    if (cfg.contains("region_offset")) dc.region_offset = get_int(cfg["region_offset"], "/region_offset");
    if (cfg.contains("region_size")) dc.region_size = get_int(cfg["region_size"], "/region_size");
    if (cfg.contains("pulse_axis")) {
        const std::string a = cfg["pulse_axis"].get<std::string>();
        if (a == "x") dc.pulse_axis = Axis::x;
        else if (a == "y") dc.pulse_axis = Axis::y;
        else schema_fail("/pulse_axis", "expected \"x\" or \"y\"");
    }
    dc.grid = parse_grid(cfg, "grid", TimeGrid{4.0, 21});
    std::tie(dc.window_lo, dc.window_hi) = parse_window(cfg, {2.0, 4.0});
    dc.krylov = parse_krylov(cfg);
    dc.validate();
    const NoiseModel noise = parse_noise(cfg, ctx);

    json summary = summary_base(ctx);
    summary["region_sites"] = dc.region_sites();
    if (noise.n_samples == 0) {
        const DeerResult res = run_deer(dc);
        write_scalar_series_csv(ctx.out_dir / "deer_echo.csv", res.echo, provenance(ctx, "deer"),
                                "sz_probe");
        write_scalar_series_csv(ctx.out_dir / "deer_deer.csv", res.deer, provenance(ctx, "deer"),
                                "sz_probe");
        write_scalar_series_csv(ctx.out_dir / "deer_difference.csv", res.difference,
                                provenance(ctx, "deer"), "difference");
        summary["windowed_difference"] = res.windowed_difference;
    } else {
        const SpinPattern pattern = SpinPattern::neel(dc.n);
        std::vector<TimeSeries> echo_runs, deer_runs;
        const NoiseAverageResult avg = noise_average(
            noise,
            [&](int, GaussianRng& rng) {
                const NoiseInstance inst = sample_instance(noise, dc.field, dc.n, pattern, rng);
                const DeerResult r = run_deer_instance(dc, inst.field, inst.psi0);
                return InstanceSeries{r.difference, {}};
            },
            {.workers = ctx.workers});
        TimeSeries mean_series{avg.t, avg.mean};
        TimeSeries err_series{avg.t, avg.std_error};
        write_scalar_series_csv(ctx.out_dir / "deer_difference.csv", mean_series,
                                provenance(ctx, "deer"), "difference", &err_series);
        summary["windowed_difference"] =
            late_time_average(mean_series, dc.window_lo, dc.window_hi);
        summary["n_samples"] = noise.n_samples;
    }
    summary["window"] = {dc.window_lo, dc.window_hi};
    write_json_file(ctx.out_dir / "deer_summary.json", summary);
}

// ------------------------------------------------------------------ quad --

void cmd_quad(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"chain", "couplings", "field"},
               {"initial_pattern", "grid", "krylov", "classify_points", "seed", "units"});
    QuadraticConfig qc;
    qc.n = parse_chain(cfg);
    qc.couplings = parse_couplings(cfg, qc.n);
    const FieldSpec spec = parse_field(cfg, ctx, qc.n);
    if (!std::holds_alternative<QuadraticFieldSpec>(spec))
        schema_fail("/field/type", "quad requires a quadratic field");
    qc.field = std::get<QuadraticFieldSpec>(spec);
    if (cfg.contains("initial_pattern"))
        qc.pattern = parse_pattern(cfg["initial_pattern"], qc.n, "/initial_pattern");
    qc.grid = parse_grid(cfg, "grid", TimeGrid{7.0, 40});
    qc.krylov = parse_krylov(cfg);
    if (cfg.contains("classify_points"))
        qc.classify_points = get_int(cfg["classify_points"], "/classify_points");

    const QuadraticResult res = run_quadratic(qc);
    write_site_series_csv(ctx.out_dir / "quad_sites.csv", res.sites, provenance(ctx, "quad"));

    json summary = summary_base(ctx);
    summary["center_site"] = res.classification.center_site;
    summary["localized"] = res.classification.localized;
    if (res.classification.inner_pair_lo) {
        summary["inner_pair"] = {*res.classification.inner_pair_lo,
                                 *res.classification.inner_pair_hi};
        summary["boundary_slope"] = res.classification.boundary_slope;
    } else {
        summary["inner_pair"] = nullptr;
    }
    write_json_file(ctx.out_dir / "quad_summary.json", summary);
}

// ------------------------------------------------------------- stability --

void cmd_stability(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"chain", "couplings", "field", "patterns"},
               {"grid", "moving_average_window", "krylov", "seed", "units"});
    StabilityConfig sc;
    sc.n = parse_chain(cfg);
    sc.couplings = parse_couplings(cfg, sc.n);
    sc.field = parse_field(cfg, ctx, sc.n);
    if (!cfg["patterns"].is_array() || cfg["patterns"].empty())
        schema_fail("/patterns", "expected a non-empty array of patterns");
    for (const json& p : cfg["patterns"])
        sc.patterns.push_back(parse_pattern(p, sc.n, "/patterns[]"));
    sc.grid = parse_grid(cfg, "grid", TimeGrid{100.0, 400});
    if (cfg.contains("moving_average_window"))
        sc.moving_window = get_number(cfg["moving_average_window"], "/moving_average_window");
    sc.krylov = parse_krylov(cfg);

    const std::vector<StabilityRecord> records = run_stability(sc);
    json summary = summary_base(ctx);
    summary["records"] = json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const StabilityRecord& rec = records[i];
        const std::string stem = "stability_" + std::to_string(i);
        write_scalar_series_csv(ctx.out_dir / (stem + "_imbalance.csv"), rec.imbalance.series,
                                provenance(ctx, "stability"), "imbalance");
        write_scalar_series_csv(ctx.out_dir / (stem + "_smoothed.csv"), rec.smoothed,
                                provenance(ctx, "stability"), "imbalance_smoothed");
        summary["records"].push_back({{"pattern", rec.pattern.bits},
                                      {"late_time_mean", rec.imbalance.late_time_mean},
                                      {"final_smoothed", rec.smoothed.v.back()}});
    }
    write_json_file(ctx.out_dir / "stability_summary.json", summary);
}

// ----------------------------------------------------------------- sweff --

void cmd_sweff(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"chain", "couplings", "g"}, {"seed", "units"});
    const int n = parse_chain(cfg);
    const double g = parse_energy(cfg["g"], ctx, "/g");

    std::vector<DipoleTerm> terms;
    const json& cj = cfg["couplings"];
    if (cj.value("type", "") == "power_law") {
        check_keys(cj, "/couplings", {"type", "alpha"}, {});
        terms = heff3_terms_power_law(n, get_number(cj["alpha"], "/couplings/alpha"), g);
    } else {
        terms = heff3_terms(parse_couplings(cfg, n), g);
    }
    write_dipole_terms_csv(ctx.out_dir / "sweff_terms.csv", terms, provenance(ctx, "sweff"));

    json summary = summary_base(ctx);
    summary["n_terms"] = terms.size();
    write_json_file(ctx.out_dir / "sweff_summary.json", summary);
}

// ----------------------------------------------------------------- sweep --

int severity_of(const std::exception& e) {
    if (dynamic_cast<const numeric_error*>(&e)) return 4;
    if (dynamic_cast<const resource_error*>(&e)) return 3;
    return 2;
}

void run_command(const std::string& command, const RunContext& ctx);

void cmd_sweep(const RunContext& ctx) {
    const json& cfg = ctx.config;
    check_keys(cfg, "", {"command", "base", "grid"}, {"seed", "units"});
    const std::string command = cfg["command"].get<std::string>();
    if (command == "sweep") schema_fail("/command", "sweeps cannot nest");
    const json& grid = cfg["grid"];
    require_object(grid, "/grid");
    if (grid.empty()) schema_fail("/grid", "expected at least one axis");

    // cartesian product; axes iterate in key order, so output order is stable
    std::vector<std::string> axes;
    std::vector<std::vector<json>> values;
    for (const auto& [path, vals] : grid.items()) {
        if (!vals.is_array() || vals.empty()) schema_fail("/grid/" + path, "expected a non-empty array");
        axes.push_back(path);
        values.push_back(std::vector<json>(vals.begin(), vals.end()));
    }
    std::vector<std::vector<std::size_t>> points;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (;;) {
        points.push_back(idx);
        std::size_t k = axes.size();
        while (k > 0) {
            if (++idx[k - 1] < values[k - 1].size()) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }

    struct PointResult {
        json params;
        std::string dir;
        std::string error;
        int severity = 0;
    };
    std::vector<PointResult> results(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t p = next.fetch_add(1);
            if (p >= points.size()) return;
            PointResult& pr = results[p];
            json point_cfg = cfg["base"];
            pr.params = json::object();
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const json& v = values[a][points[p][a]];
                std::string ptr = "/" + axes[a]; // dotted path -> JSON pointer
                for (char& ch : ptr)
                    if (ch == '.') ch = '/';
                point_cfg[json::json_pointer(ptr)] = v;
                pr.params[axes[a]] = v;
            }
            char label[32];
            std::snprintf(label, sizeof(label), "point_%03zu", p);
            pr.dir = label;
            if (!point_cfg.contains("seed")) point_cfg["seed"] = ctx.seed;
            RunContext sub = ctx;
            sub.config = point_cfg;
            sub.out_dir = ctx.out_dir / label;
            sub.workers = 1;
            try {
                fs::create_directories(sub.out_dir);
                run_command(command, sub);
            } catch (const std::exception& e) {
                pr.error = e.what();
                pr.severity = severity_of(e);
            }
        }
    };
    std::vector<std::thread> pool;
    const int nw = std::max(1, std::min<int>(ctx.workers, static_cast<int>(points.size())));
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    json summary = summary_base(ctx);
    summary["command"] = command;
    summary["points"] = json::array();
    int worst = 0;
    for (const PointResult& pr : results) {
        json entry{{"params", pr.params}, {"dir", pr.dir}};
        if (!pr.error.empty()) {
            entry["error"] = pr.error;
            worst = std::max(worst, pr.severity);
        }
        summary["points"].push_back(entry);
    }
    write_json_file(ctx.out_dir / "sweep_summary.json", summary);
    if (worst == 4) throw numeric_error("sweep finished with failed points (see sweep_summary.json)");
    if (worst == 3) throw resource_error("sweep finished with failed points (see sweep_summary.json)");
    if (worst != 0) throw config_error("sweep finished with failed points (see sweep_summary.json)");
}

void run_command(const std::string& command, const RunContext& ctx) {
    if (command == "levels") cmd_levels(ctx);
    else if (command == "quench") cmd_quench(ctx);
    else if (command == "deer") cmd_deer(ctx);
    else if (command == "quad") cmd_quad(ctx);
    else if (command == "stability") cmd_stability(ctx);
    else if (command == "sweff") cmd_sweff(ctx);
    else if (command == "sweep") cmd_sweep(ctx);
    else throw config_error("unknown command " + command);
}

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into a line number
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw config_error("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stark many-body localization simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string out_dir = "out";

    for (const char* name : {"levels", "quench", "deer", "quad", "stability", "sweff", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")
            ->required()
            ->envname("STARKMBL_CONFIG");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")->envname("STARKMBL_SEED");
        sub->add_option("--workers", workers, "worker threads for sweeps and noise averaging")
            ->envname("STARKMBL_WORKERS");
        sub->add_option("--out", out_dir, "output directory")->envname("STARKMBL_OUT");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunContext ctx;
        ctx.config = load_config(config_path);
        require_object(ctx.config, "");
        if (ctx.config.contains("units")) {
            check_keys(ctx.config["units"], "/units", {}, {"j0_khz"});
            ctx.j0_khz = ctx.config["units"].value("j0_khz", 0.25);
            if (!(ctx.j0_khz > 0.0)) schema_fail("/units/j0_khz", "must be positive");
        }
        ctx.seed = ctx.config.value("seed", std::uint64_t{0});
        for (CLI::App* sub : app.get_subcommands()) {
            if (sub->count("--seed") > 0) ctx.seed = seed;
            ctx.config["seed"] = ctx.seed; // resolved seed is part of provenance
        }
        ctx.workers = workers;
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);

        run_command(app.get_subcommands().front()->get_name(), ctx);
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return 3;
    } catch (const numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
