// Command-line front end: solves layered broadcast power allocations and
// writes plot-ready CSV or JSON. Every output carries a run manifest (full
// resolved configuration) so a run can be reproduced bit for bit; the
// manifest timestamp defaults to a fixed epoch placeholder to keep reruns
// byte-identical, pass --stamp to record wall-clock time instead.
//
// Exit codes: 0 success, 2 flag or configuration errors, 3 solver failures,
// 4 cross-check tolerance breach in `compare`.

#include "lbcopt/baselines.hpp"
#include "lbcopt/channel.hpp"
#include "lbcopt/continuum.hpp"
#include "lbcopt/discrete.hpp"
#include "lbcopt/errors.hpp"
#include "lbcopt/fading.hpp"
#include "lbcopt/montecarlo.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string iso_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_base(const std::string& command, const std::string& format, bool stamp) {
    json m;
    m["command"] = command;
    m["tool"] = "lbcopt";
    m["version"] = kVersion;
    m["format"] = format;
    m["timestamp"] = stamp ? iso_now() : "1970-01-01T00:00:00Z";
    m["quadrature_abs_tol"] = 1e-12;
    m["quadrature_rel_tol"] = 1e-10;
    m["root_rel_tol"] = 1e-12;
    m["profile_grid_points"] = 2048;
    return m;
}

void describe_fading(json& m, const lbcopt::FadingModel& fading, const std::string& dist) {
    m["dist"] = dist;
    if (fading.is_erlang()) {
        m["diversity"] = fading.diversity();
        m["mean_gain"] = fading.mean_gain();
    } else {
        m["states"] = fading.state_count();
    }
}

std::string render_csv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<json>>& rows) {
    std::string out;
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c)
            out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c)
                out += ',';
            const json& cell = row[c];
            if (cell.is_null())
                continue;
            if (cell.is_string())
                out += cell.get<std::string>();
            else if (cell.is_boolean())
                out += cell.get<bool>() ? "true" : "false";
            else
                out += fmt_double(cell.get<double>());
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& payload) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::invalid_argument("cannot open output file: " + path);
    f << payload;
}

// CSV goes to --out (or stdout) with manifest and summary in a .manifest.json
// sidecar (or on stderr); JSON embeds everything in one object.
void emit(const std::string& format, const std::string& out_path, const json& manifest,
          const json& summary, const std::vector<std::string>& columns,
          const std::vector<std::vector<json>>& rows, const json& extra = json()) {
    if (format == "json") {
        json doc;
        doc["manifest"] = manifest;
        json data;
        if (!summary.is_null())
            data["summary"] = summary;
        data["columns"] = columns;
        data["rows"] = rows;
        if (!extra.is_null())
            for (auto it = extra.begin(); it != extra.end(); ++it)
                data[it.key()] = it.value();
        doc["data"] = data;
        const std::string payload = doc.dump(2) + "\n";
        if (out_path.empty())
            std::cout << payload;
        else
            write_file(out_path, payload);
        return;
    }
    const std::string payload = render_csv(columns, rows);
    json side;
    side["manifest"] = manifest;
    if (!summary.is_null())
        side["summary"] = summary;
    if (!extra.is_null())
        for (auto it = extra.begin(); it != extra.end(); ++it)
            side[it.key()] = it.value();
    if (out_path.empty()) {
        std::cout << payload;
        std::cerr << side.dump() << "\n";
    } else {
        write_file(out_path, payload);
        write_file(out_path + ".manifest.json", side.dump(2) + "\n");
    }
}

struct SnrRange {
    double lo, hi, step;
};

SnrRange parse_range(const std::string& spec) {
    SnrRange r{};
    const size_t c1 = spec.find(':');
    const size_t c2 = (c1 == std::string::npos) ? std::string::npos : spec.find(':', c1 + 1);
    try {
        if (c2 == std::string::npos)
            throw std::invalid_argument("");
        r.lo = std::stod(spec.substr(0, c1));
        r.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        r.step = std::stod(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("--snr-db-range must look like lo:hi:step");
    }
    if (!(r.step > 0.0) || r.hi < r.lo)
        throw std::invalid_argument("--snr-db-range needs step > 0 and hi >= lo");
    return r;
}

std::vector<double> range_points(const SnrRange& r) {
    std::vector<double> v;
    for (double x = r.lo; x <= r.hi + 1e-9 * r.step; x += r.step)
        v.push_back(x);
    return v;
}

// Fixed-order task fan-out; results land by index so output order never
// depends on scheduling.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn) {
    const size_t workers = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

struct CommonArgs {
    std::string dist;
    double snr_db = 0.0;
    double bandwidth_ratio = 1.0;
    std::string format = "csv";
    std::string out;
    bool stamp = false;
};

int run_solve(const CommonArgs& a) {
    lbcopt::ChannelConfig cfg{lbcopt::db_to_linear(a.snr_db), a.bandwidth_ratio,
                              lbcopt::FadingModel::parse(a.dist)};
    const auto sol = lbcopt::continuum::solve(cfg);

    json manifest = manifest_base("solve", a.format, a.stamp);
    describe_fading(manifest, cfg.fading, a.dist);
    manifest["snr_db"] = a.snr_db;
    manifest["power"] = cfg.power;
    manifest["bandwidth_ratio"] = a.bandwidth_ratio;

    json summary;
    summary["gamma_o"] = sol.gamma_o;
    summary["gamma_p"] = sol.gamma_p;
    summary["expected_distortion"] = sol.expected_distortion;
    summary["multiple_gamma_o_roots"] = sol.multiple_gamma_o_roots;

    std::vector<std::vector<json>> rows;
    rows.reserve(sol.grid.size());
    for (size_t i = 0; i < sol.grid.size(); ++i)
        rows.push_back({sol.grid[i], sol.cumulative_power[i], sol.power_density[i],
                        sol.distortion[i], sol.weight[i]});
    emit(a.format, a.out, manifest, summary,
         {"gamma", "cumulative_power", "power_density", "distortion", "weight"}, rows);
    std::fprintf(stderr, "solve: gamma_o=%s gamma_p=%s expected_distortion=%s\n",
                 fmt_double(sol.gamma_o).c_str(), fmt_double(sol.gamma_p).c_str(),
                 fmt_double(sol.expected_distortion).c_str());
    return 0;
}

int run_power_dist(const CommonArgs& a, bool with_capacity_max) {
    lbcopt::ChannelConfig cfg{lbcopt::db_to_linear(a.snr_db), a.bandwidth_ratio,
                              lbcopt::FadingModel::parse(a.dist)};
    const auto sol = lbcopt::continuum::solve(cfg);

    json manifest = manifest_base("power-dist", a.format, a.stamp);
    describe_fading(manifest, cfg.fading, a.dist);
    manifest["snr_db"] = a.snr_db;
    manifest["power"] = cfg.power;
    manifest["bandwidth_ratio"] = a.bandwidth_ratio;
    manifest["capacity_max"] = with_capacity_max;

    json summary;
    summary["gamma_o"] = sol.gamma_o;
    summary["gamma_p"] = sol.gamma_p;
    summary["expected_distortion"] = sol.expected_distortion;

    std::vector<std::string> columns{"gamma", "power_density", "cumulative_power"};
    if (with_capacity_max)
        columns.push_back("capacity_max_cumulative_power");
    std::vector<std::vector<json>> rows;
    rows.reserve(sol.grid.size());
    for (size_t i = 0; i < sol.grid.size(); ++i) {
        std::vector<json> row{sol.grid[i], sol.power_density[i], sol.cumulative_power[i]};
        if (with_capacity_max)
            row.push_back(
                lbcopt::baselines::capacity_max_cumulative_power(cfg.fading, sol.grid[i]));
        rows.push_back(std::move(row));
    }
    emit(a.format, a.out, manifest, summary, columns, rows);
    std::fprintf(stderr, "power-dist: gamma_o=%s gamma_p=%s\n",
                 fmt_double(sol.gamma_o).c_str(), fmt_double(sol.gamma_p).c_str());
    return 0;
}

int run_sweep(const CommonArgs& a, const std::string& range_spec,
              std::vector<int> diversities, std::uint64_t mc_samples, std::uint64_t seed) {
    const auto base = lbcopt::FadingModel::parse(a.dist);
    if (!base.is_erlang())
        throw std::invalid_argument("sweep: --dist must be an erlang model");
    if (diversities.empty())
        diversities.push_back(base.diversity());
    const auto snrs = range_points(parse_range(range_spec));

    struct Point {
        double snr_db, power, layered, csit, infdiv;
        std::optional<lbcopt::mc::McEstimate> mc;
    };
    const size_t n_tasks = diversities.size() * snrs.size();
    std::vector<Point> points(n_tasks);
    parallel_for(n_tasks, [&](size_t idx) {
        const int l = diversities[idx / snrs.size()];
        const double snr = snrs[idx % snrs.size()];
        lbcopt::ChannelConfig cfg{lbcopt::db_to_linear(snr), a.bandwidth_ratio,
                                  lbcopt::FadingModel::erlang(l, base.mean_gain())};
        const auto sol = lbcopt::continuum::solve(cfg);
        Point pt{snr, cfg.power, sol.expected_distortion,
                 lbcopt::baselines::csit_expected_distortion(cfg),
                 lbcopt::baselines::infinite_diversity_distortion(cfg), std::nullopt};
        if (mc_samples > 0)
            pt.mc = lbcopt::mc::estimate_expected_distortion(sol, mc_samples, seed + idx);
        points[idx] = pt;
    });

    json manifest = manifest_base("sweep", a.format, a.stamp);
    describe_fading(manifest, base, a.dist);
    manifest["snr_db_range"] = range_spec;
    manifest["bandwidth_ratio"] = a.bandwidth_ratio;
    manifest["diversity"] = diversities;
    if (mc_samples > 0) {
        manifest["mc_samples"] = mc_samples;
        manifest["seed"] = seed;
        manifest["rng"] = lbcopt::mc::kRngAlgorithm;
        manifest["mc_row_seed"] = "seed + row_index";
    }

    // Exponent fit per diversity order when the swept range supports it.
    std::vector<json> exponents;
    std::vector<json> exponent_cells(diversities.size(), json());
    for (size_t d = 0; d < diversities.size(); ++d) {
        std::vector<lbcopt::baselines::SweepPoint> pts;
        for (size_t s = 0; s < snrs.size(); ++s) {
            const Point& p = points[d * snrs.size() + s];
            pts.push_back({p.power, p.layered});
        }
        json entry;
        entry["diversity"] = diversities[d];
        try {
            const double e = lbcopt::baselines::fit_distortion_exponent(pts);
            entry["exponent"] = e;
            exponent_cells[d] = e;
        } catch (const std::invalid_argument&) {
            entry["exponent"] = nullptr; // range too narrow for a fit
        }
        exponents.push_back(entry);
    }

    std::vector<std::vector<json>> rows;
    for (size_t d = 0; d < diversities.size(); ++d)
        for (size_t s = 0; s < snrs.size(); ++s) {
            const Point& p = points[d * snrs.size() + s];
            rows.push_back({p.snr_db, p.power, diversities[d], p.layered, p.csit, p.infdiv,
                            p.mc ? json(p.mc->mean) : json(),
                            p.mc ? json(p.mc->std_error) : json(), exponent_cells[d]});
        }
    json extra;
    extra["exponents"] = exponents;
    emit(a.format, a.out, manifest, json(),
         {"snr_db", "power", "diversity", "layered_distortion", "csit_bound",
          "infinite_diversity_distortion", "mc_mean", "mc_std_error", "fitted_exponent"},
         rows, extra);
    return 0;
}

int run_compare(const CommonArgs& a, std::optional<double> delta_gamma,
                std::optional<double> gamma_max_opt, std::optional<int> layers,
                int oracle_grid, std::uint64_t mc_samples, std::uint64_t seed) {
    lbcopt::ChannelConfig cfg{lbcopt::db_to_linear(a.snr_db), a.bandwidth_ratio,
                              lbcopt::FadingModel::parse(a.dist)};
    if (!cfg.fading.is_erlang())
        throw std::invalid_argument("compare: --dist must be an erlang model");
    const double gamma_max = gamma_max_opt.value_or(12.0 * cfg.fading.mean_gain());

    const auto sol = lbcopt::continuum::solve(cfg);
    std::vector<std::vector<json>> rows;
    rows.push_back({"continuum", sol.expected_distortion, json(), json(), json(), json(), json()});
    bool breach = false;
    const auto add_row = [&](const char* method, double value, const char* ref, double dev,
                             const char* kind, double tol) {
        const bool ok = dev <= tol;
        breach = breach || !ok;
        rows.push_back({method, value, ref, dev, kind, tol, ok});
        std::fprintf(stderr, "compare: %s=%s vs %s deviation=%s (%s tol %s) %s\n", method,
                     fmt_double(value).c_str(), ref, fmt_double(dev).c_str(), kind,
                     fmt_double(tol).c_str(), ok ? "ok" : "BREACH");
    };

    if (delta_gamma) {
        const auto states = cfg.fading.discretize(*delta_gamma, gamma_max);
        const auto lay = lbcopt::discrete::solve_discrete(states, cfg.power, a.bandwidth_ratio);
        const double dev = std::abs(lay.expected_distortion - sol.expected_distortion) /
                           sol.expected_distortion;
        add_row("discrete", lay.expected_distortion, "continuum", dev, "relative",
                *delta_gamma / cfg.fading.mean_gain());
    }
    if (layers) {
        if (*layers < 1)
            throw std::invalid_argument("compare: --layers must be >= 1");
        // bin width chosen so the discretization lands on exactly M states
        const auto states = cfg.fading.discretize(gamma_max / std::max(1, *layers - 1),
                                                  gamma_max * (1.0 - 1e-12));
        const auto lay = lbcopt::discrete::solve_discrete(states, cfg.power, a.bandwidth_ratio);
        rows.push_back({"discrete_coarse", lay.expected_distortion, json(), json(), json(),
                        json(), json()});
        std::fprintf(stderr, "compare: discrete_coarse=%s (%d layers)\n",
                     fmt_double(lay.expected_distortion).c_str(), *layers);
        if (*layers <= 4) {
            const auto oracle = lbcopt::discrete::brute_force_oracle(states, cfg.power,
                                                                     a.bandwidth_ratio,
                                                                     oracle_grid);
            add_row("brute_force", oracle.expected_distortion, "discrete_coarse",
                    std::abs(oracle.expected_distortion - lay.expected_distortion), "absolute",
                    1e-5);
        }
    }
    if (mc_samples > 0) {
        const auto est = lbcopt::mc::estimate_expected_distortion(sol, mc_samples, seed);
        add_row("monte_carlo", est.mean, "continuum",
                std::abs(est.mean - sol.expected_distortion), "absolute", 3.0 * est.std_error);
    }

    json manifest = manifest_base("compare", a.format, a.stamp);
    describe_fading(manifest, cfg.fading, a.dist);
    manifest["snr_db"] = a.snr_db;
    manifest["power"] = cfg.power;
    manifest["bandwidth_ratio"] = a.bandwidth_ratio;
    if (delta_gamma)
        manifest["delta_gamma"] = *delta_gamma;
    if (delta_gamma || layers)
        manifest["gamma_max"] = gamma_max;
    if (layers) {
        manifest["layers"] = *layers;
        manifest["oracle_grid_points"] = oracle_grid;
    }
    if (mc_samples > 0) {
        manifest["mc_samples"] = mc_samples;
        manifest["seed"] = seed;
        manifest["rng"] = lbcopt::mc::kRngAlgorithm;
    }
    json summary;
    summary["gamma_o"] = sol.gamma_o;
    summary["gamma_p"] = sol.gamma_p;
    summary["expected_distortion"] = sol.expected_distortion;
    summary["tolerance_breach"] = breach;
    emit(a.format, a.out, manifest, summary,
         {"method", "expected_distortion", "compared_to", "deviation", "deviation_kind",
          "tolerance", "within_tolerance"},
         rows);
    return breach ? 4 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "lbcopt: minimum expected distortion for layered broadcast source-channel coding\n"
        "over slow fading. Solves the continuum power allocation across fading states,\n"
        "discrete layerings, bounds, and Monte Carlo validation.\n\n"
        "Distributions: erlang:L=<int>,mean=<float>  or  discrete:@states.csv\n"
        "(CSV with header 'gamma,probability', ascending gains, probabilities > 0\n"
        "summing to 1). CSV output is UTF-8 with '.' decimals and a fixed column\n"
        "order listed in each subcommand's help; JSON output is one object with\n"
        "'manifest' and 'data' keys. Exit codes: 0 ok, 2 bad flags/config, 3 solver\n"
        "failure, 4 compare tolerance breach."};
    app.require_subcommand(1);

    CommonArgs sa, pa, wa, ca;
    std::string range_spec;
    std::vector<int> diversities;
    bool capacity_max = false;
    std::uint64_t sweep_mc = 0, sweep_seed = 1;
    std::uint64_t cmp_mc = 0, cmp_seed = 1;
    double cmp_delta_gamma = 0.0, cmp_gamma_max = 0.0;
    int cmp_layers = 0, cmp_grid = 2000;

    auto add_common = [](CLI::App* cmd, CommonArgs& args, bool with_snr) {
        cmd->add_option("--dist", args.dist, "channel distribution spec")->required();
        if (with_snr)
            cmd->add_option("--snr-db", args.snr_db, "transmit SNR in dB")->required();
        cmd->add_option("--bandwidth-ratio", args.bandwidth_ratio,
                        "source symbols per channel symbol (b > 0)")
            ->capture_default_str();
        cmd->add_option("--format", args.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        cmd->add_option("--out", args.out, "output path (stdout when omitted)");
        cmd->add_flag("--stamp", args.stamp,
                      "record wall-clock time in the manifest (breaks byte-identical reruns)");
    };

    auto* solve = app.add_subcommand(
        "solve",
        "Optimal continuum allocation and its expected distortion.\n"
        "CSV columns: gamma,cumulative_power,power_density,distortion,weight\n"
        "(summary and manifest in <out>.manifest.json, or stderr without --out)");
    add_common(solve, sa, true);

    auto* pdist = app.add_subcommand(
        "power-dist",
        "Power allocation profiles rho*(gamma) and T*(gamma).\n"
        "CSV columns: gamma,power_density,cumulative_power[,capacity_max_cumulative_power]");
    add_common(pdist, pa, true);
    pdist->add_flag("--capacity-max", capacity_max,
                    "also emit the expected-capacity-maximizing profile");

    auto* sweep = app.add_subcommand(
        "sweep",
        "Distortion vs SNR for one or more diversity orders, with bounds and the\n"
        "fitted distortion exponent (top half of the log-power range; needs >= 4\n"
        "points spanning >= 20 dB, otherwise the exponent cells stay empty).\n"
        "CSV columns: snr_db,power,diversity,layered_distortion,csit_bound,\n"
        "infinite_diversity_distortion,mc_mean,mc_std_error,fitted_exponent");
    add_common(sweep, wa, false);
    sweep->add_option("--snr-db-range", range_spec, "lo:hi:step in dB")->required();
    sweep->add_option("--diversity", diversities,
                      "comma-separated diversity orders (default: the --dist value)")
        ->delimiter(',');
    sweep->add_option("--mc-samples", sweep_mc, "Monte Carlo samples per point (0 = off)");
    sweep->add_option("--seed", sweep_seed, "Monte Carlo base seed (row seed = base + row index)")
        ->capture_default_str();

    auto* cmp = app.add_subcommand(
        "compare",
        "Cross-checks one operating point: continuum vs fine discretization\n"
        "(--delta-gamma; relative tolerance delta_gamma/mean_gain), recursion vs\n"
        "brute force (--layers M, oracle only for M <= 4; absolute tolerance 1e-5),\n"
        "and Monte Carlo vs continuum (--mc-samples; 3 standard errors). Exits 4 on\n"
        "any breach.\nCSV columns: method,expected_distortion,compared_to,deviation,\n"
        "deviation_kind,tolerance,within_tolerance");
    add_common(cmp, ca, true);
    auto* opt_dg = cmp->add_option("--delta-gamma", cmp_delta_gamma,
                                   "state spacing for the fine discretization leg");
    auto* opt_gm = cmp->add_option("--gamma-max", cmp_gamma_max,
                                   "discretization truncation (default 12 * mean gain)");
    auto* opt_layers = cmp->add_option("--layers", cmp_layers, "coarse layer count leg");
    cmp->add_option("--grid-points", cmp_grid, "brute-force grid per dimension")
        ->capture_default_str();
    cmp->add_option("--mc-samples", cmp_mc, "Monte Carlo samples (0 = off)");
    cmp->add_option("--seed", cmp_seed, "Monte Carlo seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed())
            return run_solve(sa);
        if (pdist->parsed())
            return run_power_dist(pa, capacity_max);
        if (sweep->parsed())
            return run_sweep(wa, range_spec, diversities, sweep_mc, sweep_seed);
        if (cmp->parsed())
            return run_compare(ca,
                               opt_dg->count() ? std::optional<double>(cmp_delta_gamma)
                                               : std::nullopt,
                               opt_gm->count() ? std::optional<double>(cmp_gamma_max)
                                               : std::nullopt,
                               opt_layers->count() ? std::optional<int>(cmp_layers)
                                                   : std::nullopt,
                               cmp_grid, cmp_mc, cmp_seed);
    } catch (const lbcopt::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
