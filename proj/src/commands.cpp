#include "isac/commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "isac/analysis.hpp"
#include "isac/config.hpp"

namespace isac {

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::string out;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
    auto* opt = app->add_option("--config", c.config, "Run configuration file");
    if (needs_config) opt->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--trials", c.trials, "Monte Carlo trials");
    app->add_option("--threads", c.threads, "Worker threads (never changes results)");
    app->add_option("--out", c.out, "Output file (default: stdout)");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.trials) cfg.trials = *c.trials;
    if (c.threads) cfg.threads = *c.threads;
    if (!c.out.empty()) cfg.out = c.out;
    if (cfg.trials < 1) throw Error(ErrorKind::config, "trials must be >= 1");
    return cfg;
}

McOptions options(const RunConfig& cfg) {
    McOptions o;
    o.threads = std::max<std::size_t>(1, cfg.threads);
    o.skip_policy = cfg.skip_policy;
    return o;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

/// Writes to cfg.out when set, otherwise to `out`.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
    if (cfg.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) throw Error(ErrorKind::io, "cannot write " + cfg.out);
    file << text;
}

std::vector<UnitaryBasis> config_bases(const RunConfig& cfg, std::size_t n) {
    if (cfg.waveforms.empty()) throw Error(ErrorKind::config, "no waveforms configured");
    std::vector<UnitaryBasis> bases;
    for (const auto& w : cfg.waveforms) bases.push_back(parse_waveform(w, n));
    return bases;
}

int cmd_sweep(const Common& common, std::ostream& out) {
    const RunConfig cfg = resolve(common);
    const Scenario sc = make_scenario(cfg);
    const auto bases = config_bases(cfg, sc.n());
    const Constellation c = Constellation::from_name(cfg.constellation);
    const SelectionMatrix t = selection(cfg.selection, sc.l());
    const SweepResult res = snr_sweep(sc, bases, c, t, snr_grid(cfg), cfg.trials, cfg.seed, options(cfg));

    std::ostringstream csv;
    csv << "snr_db,waveform,constellation,crb_mc,crb_jensen,stderr,trials_used,trials_skipped\n";
    for (const auto& r : res.rows) {
        csv << num(r.snr_db) << "," << csv_field(r.waveform) << "," << csv_field(r.constellation) << "," << num(r.crb_mc) << ","
            << num(r.crb_jensen) << "," << num(r.std_error) << "," << r.trials_used << ","
            << r.trials_skipped << "\n";
    }
    emit(cfg, out, csv.str());

    if (!cfg.out.empty()) {
        std::ostringstream meta;
        meta << "seed = " << cfg.seed << "\n";
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
        meta << "config_hash = " << hash << "\n";
        meta << "trials = " << cfg.trials << "\n";
        meta << "skip_policy = " << to_string(cfg.skip_policy) << "\n";
        if (cfg.bandwidth_hz) {
            meta << "bandwidth_hz = " << num(*cfg.bandwidth_hz) << "\n";
            meta << "range_factor_m2 = " << num(range_unit_factor(*cfg.bandwidth_hz)) << "\n";
        }
        for (const auto& p : res.paired) {
            meta << "paired_diff," << num(p.snr_db) << "," << csv_field(p.waveform + " - " + p.reference) << ","
                 << num(p.mean_diff) << "," << num(p.std_error) << "," << p.pairs << "\n";
        }
        std::ofstream file(cfg.out + ".meta", std::ios::binary);
        if (!file) throw Error(ErrorKind::io, "cannot write " + cfg.out + ".meta");
        file << meta.str();
    }
    return exit_ok;
}

int cmd_bandwidth(const Common& common, const std::string& selector, std::size_t n, std::ostream& out) {
    RunConfig cfg;
    cfg.out = common.out;
    const UnitaryBasis basis = parse_waveform(selector, n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    for (Index col = 0; col < basis.size(); ++col) {
        const double b = rms_bandwidth(basis.u().col(col));
        lo = std::min(lo, b);
        hi = std::max(hi, b);
        sum += b;
    }
    std::ostringstream o;
    o << "waveform,n,rms_min,rms_mean,rms_max,alpha\n";
    o << csv_field(basis.label()) << "," << n << "," << num(lo) << "," << num(sum / static_cast<double>(basis.size())) << ","
      << num(hi) << "," << num(alpha_spread(basis)) << "\n";
    emit(cfg, out, o.str());
    return exit_ok;
}

int cmd_gap(const Common& common, std::ostream& out) {
    const RunConfig cfg = resolve(common);
    const Scenario sc = make_scenario(cfg);
    const Geometry geom = build_geometry(sc);
    const Constellation c = Constellation::from_name(cfg.constellation);
    const SelectionMatrix t = selection(cfg.selection, sc.l());
    const RMatrix mu = mu_weights(geom, t);
    std::ostringstream o;
    o << "waveform,constellation,kappa,gap_closed,gap_mc,stderr_mc,trials,eisl_gap\n";
    for (const auto& basis : config_bases(cfg, sc.n())) {
        const GapReport rep = second_order_gap(mu, basis, c.kurtosis());
        const Estimate mc = second_order_gap_mc(geom, basis, c, t, cfg.trials, cfg.seed, options(cfg));
        o << csv_field(basis.label()) << "," << c.name() << "," << num(c.kurtosis()) << "," << num(rep.gap_closed) << ","
          << num(mc.value) << "," << num(mc.std_error) << "," << cfg.trials << ","
          << num(eisl_gap(basis, c.kurtosis())) << "\n";
    }
    emit(cfg, out, o.str());
    return exit_ok;
}

int cmd_geodesic(const Common& common, std::optional<std::uint64_t> direction_seed, bool diagonal,
                 std::ostream& out) {
    RunConfig cfg = resolve(common);
    if (direction_seed) cfg.direction_seed = *direction_seed;
    const Scenario sc = make_scenario(cfg);
    const Geometry geom = build_geometry(sc);
    const Constellation c = Constellation::from_name(cfg.constellation);
    const SelectionMatrix t = selection(cfg.selection, sc.l());
    GeodesicDirection k = GeodesicDirection::random(sc.n(), cfg.direction_seed);
    if (diagonal) {
        const CMatrix d = k.k().diagonal().asDiagonal();
        k = GeodesicDirection::normalized(d);
    }
    const GeodesicReport rep =
        geodesic_derivatives(geom, k, c, t, cfg.step, cfg.trials, cfg.seed, options(cfg));
    std::ostringstream o;
    o << "quantity,value,stderr\n";
    o << "d1_fd," << num(rep.d1_fd.value) << "," << num(rep.d1_fd.std_error) << "\n";
    o << "d2_fd," << num(rep.d2_fd.value) << "," << num(rep.d2_fd.std_error) << "\n";
    o << "d2_r2_fd," << num(rep.d2_r2_fd.value) << "," << num(rep.d2_r2_fd.std_error) << "\n";
    o << "d2_r2_closed," << num(rep.d2_r2_closed) << ",0\n";
    o << "f0," << num(rep.f0.value) << "," << num(rep.f0.std_error) << "\n";
    o << "jensen," << num(rep.jensen) << ",0\n";
    o << "step," << num(rep.step) << ",0\n";
    o << "trials_used," << rep.trials_used << ",0\n";
    o << "trials_skipped," << rep.trials_skipped << ",0\n";
    emit(cfg, out, o.str());
    return exit_ok;
}

int cmd_scaling(const Common& common, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(common);
    const Scenario sc = make_scenario(cfg);
    const Constellation c = Constellation::from_name(cfg.constellation);
    const BasisFamily family = parse_basis_family(cfg.family);
    const ScalingReport z = z_moment_scaling(sc, family, c, cfg.n_list, cfg.moment_k, cfg.trials, cfg.seed,
                                             options(cfg));
    std::ostringstream o;
    o << "section,n,value,stderr\n";
    for (const auto& p : z.points) o << "z_moment," << p.n << "," << num(p.moment) << "," << num(p.std_error) << "\n";
    o << "z_slope,," << num(z.slope) << ",\n";
    try {
        const SpreadReport s = spread_gap_lower_bound_check(sc, family, c.kurtosis(), cfg.n_list,
                                                            selection(cfg.selection, sc.l()));
        for (const auto& p : s.points) {
            o << "alpha," << p.n << "," << num(p.alpha) << ",\n";
            o << "gap_n2," << p.n << "," << num(p.gap_n2) << ",\n";
            o << "freq_sum_over_n," << p.n << "," << num(p.freq_sum_over_n) << ",\n";
            o << "freq_bound_holds," << p.n << "," << (p.freq_bound_holds ? 1 : 0) << ",\n";
        }
        o << "gap_n2_variation,," << num(s.variation) << ",\n";
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::inapplicable_basis) throw;
        err << "spread check skipped: " << e.what() << "\n";
    }
    emit(cfg, out, o.str());
    return exit_ok;
}

struct Check {
    std::string name;
    bool pass;
    double residual;
    std::string detail;
    bool skipped = false;
};

int cmd_validate(const Common& common, const std::string& basis_file, const std::string& scenario_file,
                 std::ostream& out) {
    RunConfig cfg = resolve(common);
    std::vector<Check> checks;
    auto add = [&](std::string name, bool pass, double residual, std::string detail = {}) {
        checks.push_back({std::move(name), pass, residual, std::move(detail)});
    };
    std::size_t telescoping_runs = 0;

    // Bases.
    const std::size_t n = 16;
    std::vector<std::pair<std::string, CMatrix>> mats;
    for (const char* sel : {"sc", "ofdm", "otfs:4x4", "otfs:8x2", "afdm:1/16,0.125", "afdm:1/2,0.1"}) {
        mats.emplace_back(sel, parse_waveform(sel, n).u());
    }
    if (!basis_file.empty()) mats.emplace_back("custom:" + basis_file, read_basis_matrix(basis_file));
    for (const auto& [label, u] : mats) {
        const double res = numerics::unitarity_residual(u);
        const double tol = 1e-9 * std::sqrt(static_cast<double>(u.rows()));
        add("unitarity " + label, res <= tol, res);
        if (res <= tol) {
            const UnitaryBasis b(u, label);
            const double ds = doubly_stochastic_residual(b.b());
            add("doubly-stochastic B " + label, ds <= 1e-9, ds);
        }
    }

    // Constellations.
    for (const char* name : {"psk4", "psk8", "psk16", "qam16", "qam64", "qam256", "qam1024", "qam128",
                             "qam512", "qam2048"}) {
        const Constellation c = Constellation::from_name(name);
        const AssumptionReport r = validate_assumptions(c.points());
        add(std::string("assumptions ") + name, r.all_pass(), 0.0);
    }
    const std::pair<const char*, double> table[] = {
        {"psk16", 1.0}, {"qam16", 1.32}, {"qam64", 1.381}, {"qam256", 1.3953}};
    for (const auto& [name, expected] : table) {
        const double k = Constellation::from_name(name).kurtosis();
        add(std::string("kurtosis ") + name, std::abs(k - expected) <= 1e-3, std::abs(k - expected));
    }

    // Scenarios.
    std::vector<std::pair<std::string, std::optional<Scenario>>> scenarios;
    if (!common.config.empty()) scenarios.emplace_back("config", make_scenario(cfg));
    scenarios.emplace_back("builtin", random_scenario(cfg.seed, 32, 3, 2.0, AmplitudeLaw::unit_random_phase));
    if (!scenario_file.empty()) {
        const auto data = read_scenario_data(scenario_file);
        const auto problems = scenario_violations(data.n, data.taus, data.betas, data.sigma2);
        add("non-degenerate scenario " + scenario_file, problems.empty(), 0.0,
            problems.empty() ? "" : problems.front());
        if (problems.empty()) scenarios.emplace_back(scenario_file, Scenario(data.n, data.taus, data.betas, data.sigma2));
    }
    for (const auto& [label, sc] : scenarios) {
        const Geometry g = build_geometry(*sc);
        const RMatrix sum = fim_via_cn(g, RVector::Ones(static_cast<Index>(g.n)));
        const double rel = (sum - g.jbar).norm() / g.jbar.norm();
        add("sum C_n = Jbar " + label, rel <= 1e-9, rel);

        // Telescoping identity on the first draw with ||Z||_2 < 1.
        const UnitaryBasis basis = basis_sc(g.n);
        const Constellation qam = Constellation::qam(16);
        const SelectionMatrix t = selection(SelectionKind::delay, g.l);
        bool found = false;
        double min_z = std::numeric_limits<double>::infinity();
        for (std::uint64_t trial = 0; trial < 200 && !found; ++trial) {
            const FimSample f = fim(g, basis, sample_symbols(qam, g.n, cfg.seed, trial));
            if (f.rcond < numerics::kSingularRcond) continue;
            const ResolventTerms r = resolvent(g, f, t);
            min_z = std::min(min_z, r.z_norm);
            if (!r.r3_available) continue;
            found = true;
            ++telescoping_runs;
            const double lhs = r.r1_trace - r.r2_trace + r.r3_trace;
            const double rhs = jensen_bound(g, t) - conditional_crb(f, t);
            const double res = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
            add("resolvent telescoping " + label, res <= 1e-8, res);
        }
        if (!found) {
            // The expansion needs ||Z||_2 < 1; a scenario with no such draw has nothing to check.
            checks.push_back({"resolvent telescoping " + label, true, 0.0,
                              "no draw with ||Z||_2 < 1 in 200, min " + num(min_z), true});
        }
    }
    if (telescoping_runs == 0) add("resolvent telescoping (any scenario)", false, 0.0, "never exercised");

    std::ostringstream o;
    bool ok = true;
    for (const auto& c : checks) {
        ok = ok && c.pass;
        o << (c.skipped ? "SKIP" : c.pass ? "PASS" : "FAIL") << "  " << c.name << "  residual=" << num(c.residual);
        if (!c.detail.empty()) o << "  (" << c.detail << ")";
        o << "\n";
    }
    o << (ok ? "all checks passed" : "validation FAILED") << "\n";
    emit(cfg, out, o.str());
    return ok ? exit_ok : exit_validation;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::degenerate_scenario:
    case ErrorKind::infeasible_separation: return exit_degenerate;
    case ErrorKind::no_valid_draws:
    case ErrorKind::singular_fim: return exit_no_valid_draws;
    default: return exit_config;
    }
}

} // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ranging CRB of ISAC modulation bases"};
    app.require_subcommand(1);

    Common sweep_o, band_o, gap_o, geo_o, scale_o, val_o;
    auto* sweep = app.add_subcommand("sweep", "SNR sweep of the Monte Carlo CRB (CSV)");
    add_common(sweep, sweep_o, true);
    sweep->get_option("--config")->required();

    auto* band = app.add_subcommand("bandwidth", "Per-column RMS bandwidth and alpha-spread of a basis");
    add_common(band, band_o, false);
    std::string selector;
    std::size_t band_n = 64;
    band->add_option("--waveform", selector, "Waveform selector")->required();
    band->add_option("--n", band_n, "Block length");

    auto* gap = app.add_subcommand("gap", "Second-order CRB gap, closed form and paired Monte Carlo");
    add_common(gap, gap_o, true);
    gap->get_option("--config")->required();

    auto* geo = app.add_subcommand("geodesic", "Finite-difference derivatives along a unitary geodesic at OFDM");
    add_common(geo, geo_o, true);
    geo->get_option("--config")->required();
    std::optional<std::uint64_t> direction_seed;
    bool diagonal = false;
    geo->add_option("--direction-seed", direction_seed, "Seed of the random direction K");
    geo->add_flag("--diagonal", diagonal, "Zero the off-diagonal part of K");

    auto* scale = app.add_subcommand("scaling", "Fluctuation-moment and spread-gap scaling in N");
    add_common(scale, scale_o, true);
    scale->get_option("--config")->required();

    auto* val = app.add_subcommand("validate", "Invariant suite");
    add_common(val, val_o, true);
    std::string basis_file, scenario_file;
    val->add_option("--basis-file", basis_file, "Custom basis to check")->check(CLI::ExistingFile);
    val->add_option("--scenario-file", scenario_file, "Scenario to check")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*sweep) return cmd_sweep(sweep_o, out);
        if (*band) return cmd_bandwidth(band_o, selector, band_n, out);
        if (*gap) return cmd_gap(gap_o, out);
        if (*geo) return cmd_geodesic(geo_o, direction_seed, diagonal, out);
        if (*scale) return cmd_scaling(scale_o, out, err);
        if (*val) return cmd_validate(val_o, basis_file, scenario_file, out);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    }
    return exit_config;
}

} // namespace isac
