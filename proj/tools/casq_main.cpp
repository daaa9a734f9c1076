// casq: analytic solver and Monte Carlo simulator for fire-sale default
// cascades in large homogeneous banking networks.
//
// Subcommands: solve, orbit, fixed-points, bifurcation, distribution,
// simulate, compare.  Each writes CSV to --output (or stdout) and a one-line
// scalar summary to stderr.  Exit codes: 0 success, 1 usage/validation
// error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "casq/cascade.hpp"
#include "casq/loss.hpp"
#include "casq/roots.hpp"
#include "casq/simulate.hpp"

namespace {

struct Options {
    std::optional<double> mu, sigma, rho, a, assets, liabilities, q, z, kappa;
    std::optional<double> x_min, x_max;
    std::optional<double> kappa_min, kappa_max;
    std::optional<double> tol;
    std::optional<long long> n, trials, grid_points, steps, max_iter;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> waves, output;
    std::string config_path;
    unsigned threads = 1;
};

double need(const std::optional<double>& v, const char* name, const char* range) {
    if (!v)
        throw std::domain_error(std::string(name) + ": required parameter missing (" + range + ")");
    return *v;
}

long long need_int(const std::optional<long long>& v, const char* name, const char* range) {
    if (!v)
        throw std::domain_error(std::string(name) + ": required parameter missing (" + range + ")");
    return *v;
}

casq::Wave parse_waves(const std::string& text) {
    if (text == "inf" || text == "infinity") return casq::Wave::infinity();
    try {
        std::size_t pos = 0;
        const int k = std::stoi(text, &pos);
        if (pos != text.size() || k < 1) throw std::invalid_argument(text);
        return casq::Wave::finite(k);
    } catch (const std::exception&) {
        throw std::domain_error("waves: must be 'inf' or an integer >= 1, got '" + text + "'");
    }
}

const char* to_string(casq::Stability s) {
    switch (s) {
        case casq::Stability::stable: return "stable";
        case casq::Stability::unstable: return "unstable";
        default: return "neutral";
    }
}

const char* to_string(casq::Regime r) {
    return r == casq::Regime::single ? "single" : "multi";
}

void merge_from_json(Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw std::domain_error("config: cannot open '" + o.config_path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::domain_error("config: invalid JSON in '" + o.config_path + "': " + e.what());
    }

    auto num = [&](const char* key, std::optional<double>& slot) {
        if (!slot && j.contains(key)) slot = j.at(key).get<double>();
    };
    auto integer = [&](const char* key, std::optional<long long>& slot) {
        if (!slot && j.contains(key)) slot = j.at(key).get<long long>();
    };
    num("mu", o.mu);
    num("sigma", o.sigma);
    num("rho", o.rho);
    num("a", o.a);
    num("assets", o.assets);
    num("liabilities", o.liabilities);
    num("q", o.q);
    num("z", o.z);
    num("kappa", o.kappa);
    num("x_min", o.x_min);
    num("x_max", o.x_max);
    integer("n", o.n);
    integer("trials", o.trials);
    integer("grid_points", o.grid_points);
    if (!o.seed && j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (!o.waves && j.contains("waves")) {
        const auto& w = j.at("waves");
        o.waves = w.is_string() ? w.get<std::string>() : std::to_string(w.get<long long>());
    }
    if (!o.output && j.contains("output")) o.output = j.at("output").get<std::string>();
}

// The CSV sink: --output file or stdout, 17 significant digits either way.
class Sink {
  public:
    explicit Sink(const std::optional<std::string>& path) {
        if (path) {
            file_.open(*path);
            if (!file_) throw std::domain_error("output: cannot open '" + *path + "' for writing");
        }
        stream().precision(17);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

casq::ModelParams model_from(const Options& o) {
    const double sigma = need(o.sigma, "sigma", "finite, > 0");
    const double rho = need(o.rho, "rho", "in [0, 1)");
    const double a = need(o.a, "a", "finite, >= 0");
    const double mu = o.mu.value_or(0.0);
    if (o.q) {
        if (o.assets || o.liabilities)
            throw std::domain_error("balance: give either --q or --assets/--liabilities, not both");
        return casq::ModelParams::idiosyncratic(*o.q, sigma, rho, a, mu);
    }
    const double assets = need(o.assets, "assets", "finite, > 0; or give --q");
    const double liabilities = need(o.liabilities, "liabilities", "0 < liabilities < assets");
    return casq::ModelParams::balance_sheet(assets, liabilities, mu, sigma, rho, a);
}

casq::NetworkConfig network_from(const Options& o) {
    casq::NetworkConfig config;
    const long long n = need_int(o.n, "n", ">= 1");
    const long long trials = need_int(o.trials, "trials", ">= 1");
    if (n < 1) throw std::domain_error("n: must be >= 1");
    if (trials < 1) throw std::domain_error("trials: must be >= 1");
    config.n = static_cast<std::size_t>(n);
    config.trials = static_cast<std::size_t>(trials);
    config.sigma = need(o.sigma, "sigma", "finite, >= 0");
    config.rho = need(o.rho, "rho", "in [0, 1)");
    config.a = need(o.a, "a", "finite, >= 0");
    config.mu = o.mu.value_or(0.0);
    config.master_seed = o.seed.value_or(0);
    if (o.z) config.fixed_z = *o.z;
    if (o.q) {
        if (o.assets || o.liabilities)
            throw std::domain_error("balance: give either --q or --assets/--liabilities, not both");
        config.balance = casq::balance_for_q(*o.q, config.mu, config.sigma);
    } else {
        config.balance.assets = need(o.assets, "assets", "finite, > 0; or give --q");
        config.balance.liabilities = need(o.liabilities, "liabilities", "0 < liabilities < assets");
    }
    config.validate();
    return config;
}

double kappa_from(const Options& o) {
    if (o.kappa) {
        if (!(std::isfinite(*o.kappa) && *o.kappa >= 0.0))
            throw std::domain_error("kappa: must be finite and >= 0");
        return *o.kappa;
    }
    const double sigma = need(o.sigma, "sigma", "finite, > 0; or give --kappa");
    const double rho = need(o.rho, "rho", "in [0, 1)");
    const double a = need(o.a, "a", "finite, >= 0");
    if (!(sigma > 0.0)) throw std::domain_error("sigma: must be > 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::domain_error("rho: must lie in [0, 1)");
    if (!(a >= 0.0)) throw std::domain_error("a: must be >= 0");
    return a / (sigma * std::sqrt(1.0 - rho));
}

casq::Probability implied_q(const Options& o) {
    if (o.q) return *o.q;
    const double assets = need(o.assets, "assets", "finite, > 0; or give --q");
    const double liabilities = need(o.liabilities, "liabilities", "0 < liabilities < assets");
    const double sigma = need(o.sigma, "sigma", "finite, > 0");
    const double mu = o.mu.value_or(0.0);
    return casq::std_normal_cdf((std::log(liabilities / assets) - mu) / sigma);
}

void summarize_geometry(std::ostream& err, const casq::BifurcationGeometry& geom) {
    err << " regime=" << to_string(geom.regime);
    if (geom.regime == casq::Regime::multi)
        err << " y0=" << geom.y0 << " y1=" << geom.y1 << " x2=" << geom.x2;
}

int cmd_solve(const Options& o) {
    const auto scenario = casq::derive_scenario(model_from(o), o.z.value_or(0.0));
    const double tol = o.tol.value_or(1e-12);
    const auto fps = casq::fixed_points(scenario, tol);
    const auto geom = casq::bifurcation_geometry(scenario.kappa);
    const double q1 = casq::std_normal_cdf(scenario.delta_1);
    const double q_inf = casq::std_normal_cdf(fps.selected);

    Sink sink(o.output);
    sink.stream() << "delta_1,kappa,delta_inf,q_1,q_inf\n"
                  << scenario.delta_1 << ',' << scenario.kappa << ',' << fps.selected << ',' << q1
                  << ',' << q_inf << '\n';

    std::cerr.precision(10);
    std::cerr << "solve: delta_1=" << scenario.delta_1 << " kappa=" << scenario.kappa
              << " delta_inf=" << fps.selected << " q_1=" << q1 << " q_inf=" << q_inf;
    summarize_geometry(std::cerr, geom);
    std::cerr << '\n';
    return 0;
}

int cmd_orbit(const Options& o) {
    const auto scenario = casq::derive_scenario(model_from(o), o.z.value_or(0.0));
    const double tol = o.tol.value_or(1e-12);
    const long long max_iter = o.max_iter.value_or(1'000'000);
    if (max_iter < 1) throw std::domain_error("max-iter: must be >= 1");
    const auto orbit = casq::run_orbit(scenario, tol, static_cast<int>(max_iter));

    Sink sink(o.output);
    sink.stream() << "k,delta_k,q_k\n";
    for (const auto& step : orbit.steps)
        sink.stream() << step.wave << ',' << step.delta << ',' << step.q << '\n';

    std::cerr.precision(10);
    std::cerr << "orbit: delta_1=" << scenario.delta_1 << " kappa=" << scenario.kappa
              << " converged=" << (orbit.converged ? "yes" : "no")
              << " delta_inf=" << orbit.delta_inf
              << " q_inf=" << casq::std_normal_cdf(orbit.delta_inf)
              << " waves=" << orbit.iterations_used << '\n';
    return 0;
}

int cmd_fixed_points(const Options& o) {
    const auto scenario = casq::derive_scenario(model_from(o), o.z.value_or(0.0));
    const double tol = o.tol.value_or(1e-12);
    const auto fps = casq::fixed_points(scenario, tol);
    const auto geom = casq::bifurcation_geometry(scenario.kappa);

    Sink sink(o.output);
    sink.stream() << "index,location,stability,selected\n";
    for (std::size_t i = 0; i < fps.points.size(); ++i) {
        const auto& point = fps.points[i];
        sink.stream() << i << ',' << point.location << ',' << to_string(point.stability) << ','
                      << (point.location == fps.selected ? 1 : 0) << '\n';
    }

    std::cerr.precision(10);
    std::cerr << "fixed-points: delta_1=" << scenario.delta_1 << " kappa=" << scenario.kappa
              << " roots=" << fps.points.size() << " selected=" << fps.selected
              << " q_inf=" << casq::std_normal_cdf(fps.selected);
    summarize_geometry(std::cerr, geom);
    std::cerr << '\n';
    return 0;
}

void write_geometry_row(std::ostream& out, double kappa, const casq::BifurcationGeometry& geom) {
    out << kappa << ',' << to_string(geom.regime) << ',';
    if (geom.regime == casq::Regime::multi) {
        out << geom.x0 << ',' << geom.x1 << ',' << geom.y0 << ',' << geom.y1 << ',' << geom.x2;
    } else {
        out << ",,,,";
    }
    out << '\n';
}

int cmd_bifurcation(const Options& o) {
    Sink sink(o.output);
    sink.stream() << "kappa,regime,x0,x1,y0,y1,x2\n";

    if (o.kappa_min || o.kappa_max || o.steps) {
        const double lo = need(o.kappa_min, "kappa-min", "finite, >= 0");
        const double hi = need(o.kappa_max, "kappa-max", ">= kappa-min");
        const long long steps = need_int(o.steps, "steps", ">= 2");
        if (!(std::isfinite(lo) && lo >= 0.0))
            throw std::domain_error("kappa-min: must be finite and >= 0");
        if (!(std::isfinite(hi) && hi >= lo))
            throw std::domain_error("kappa-max: must be >= kappa-min");
        if (steps < 2) throw std::domain_error("steps: must be >= 2");
        for (long long i = 0; i < steps; ++i) {
            const double kappa =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
            write_geometry_row(sink.stream(), kappa, casq::bifurcation_geometry(kappa));
        }
        std::cerr.precision(10);
        std::cerr << "bifurcation: scan kappa in [" << lo << ", " << hi << "] steps=" << steps
                  << " kappa_0=" << casq::kappa_critical() << '\n';
        return 0;
    }

    const double kappa = need(o.kappa, "kappa", "finite, >= 0");
    const auto geom = casq::bifurcation_geometry(kappa);
    write_geometry_row(sink.stream(), kappa, geom);

    std::cerr.precision(10);
    std::cerr << "bifurcation: kappa=" << kappa << " kappa_0=" << geom.kappa_0;
    summarize_geometry(std::cerr, geom);
    std::cerr << '\n';
    return 0;
}

int cmd_distribution(const Options& o) {
    casq::DistributionSpec spec;
    spec.q = need(o.q, "q", "in (0, 1)");
    spec.rho = need(o.rho, "rho", "in (0, 1)");
    spec.kappa = kappa_from(o);
    spec.wave = parse_waves(o.waves.value_or("inf"));
    spec.validate();

    const long long grid_points = o.grid_points.value_or(201);
    if (grid_points < 2) throw std::domain_error("grid_points: must be >= 2");
    const double x_min = o.x_min.value_or(1e-4);
    const double x_max = o.x_max.value_or(1.0 - 1e-4);
    const auto curve = casq::tabulate(spec, static_cast<int>(grid_points), x_min, x_max);

    Sink sink(o.output);
    if (curve.gap) {
        sink.stream() << "# gap_lo=" << curve.gap->lo << ", gap_hi=" << curve.gap->hi
                      << ", jump_at=" << curve.jump->x << '\n';
    }
    sink.stream() << "x,cdf,pdf\n";
    for (const auto& point : curve.grid)
        sink.stream() << point.x << ',' << point.cdf << ',' << point.pdf << '\n';

    std::cerr.precision(10);
    std::cerr << "distribution: q=" << spec.q << " rho=" << spec.rho << " kappa=" << spec.kappa
              << " waves=" << o.waves.value_or("inf");
    if (curve.gap)
        std::cerr << " gap_lo=" << curve.gap->lo << " gap_hi=" << curve.gap->hi
                  << " jump_at=" << curve.jump->x;
    std::cerr << '\n';
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto config = network_from(o);
    const auto ensemble = casq::run_ensemble(config, o.threads);

    Sink sink(o.output);
    sink.stream() << "trial,z,waves,q_final\n";
    for (std::size_t t = 0; t < ensemble.trials.size(); ++t) {
        const auto& trial = ensemble.trials[t];
        sink.stream() << t << ',' << trial.z << ',' << trial.waves << ',' << trial.q_final << '\n';
    }

    std::cerr.precision(10);
    std::cerr << "simulate: n=" << config.n << " trials=" << config.trials
              << " seed=" << config.master_seed << " mean=" << ensemble.summary.mean
              << " q95=" << ensemble.summary.q95 << '\n';
    return 0;
}

int cmd_compare(const Options& o) {
    const auto config = network_from(o);
    if (!(config.sigma > 0.0))
        throw std::domain_error("sigma: must be > 0 to compare against the analytic distribution");
    auto ensemble = casq::run_ensemble(config, o.threads);

    casq::DistributionSpec spec;
    spec.q = implied_q(o);
    spec.rho = config.rho;
    spec.kappa = config.a / (config.sigma * std::sqrt(1.0 - config.rho));
    spec.wave = parse_waves(o.waves.value_or("inf"));
    spec.validate();

    const auto analytic = [&spec](double x) -> double {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return casq::loss_cdf(x, spec);
    };
    ensemble.ks_vs_analytic = casq::ks_distance(ensemble.samples, analytic);

    Sink sink(o.output);
    sink.stream() << "metric,value\n"
                  << "ks," << *ensemble.ks_vs_analytic << '\n'
                  << "n," << config.n << '\n'
                  << "trials," << config.trials << '\n'
                  << "seed," << config.master_seed << '\n'
                  << "mean," << ensemble.summary.mean << '\n'
                  << "variance," << ensemble.summary.variance << '\n'
                  << "q05," << ensemble.summary.q05 << '\n'
                  << "q25," << ensemble.summary.q25 << '\n'
                  << "q50," << ensemble.summary.q50 << '\n'
                  << "q75," << ensemble.summary.q75 << '\n'
                  << "q95," << ensemble.summary.q95 << '\n';

    std::cerr.precision(10);
    std::cerr << "compare: ks=" << *ensemble.ks_vs_analytic << " n=" << config.n
              << " trials=" << config.trials << " kappa=" << spec.kappa
              << " waves=" << o.waves.value_or("inf") << '\n';
    return 0;
}

void add_model_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--mu", o.mu, "Mean log asset return (default 0)");
    cmd->add_option("--sigma", o.sigma, "Return volatility");
    cmd->add_option("--rho", o.rho, "Asset correlation in [0, 1)");
    cmd->add_option("--a", o.a, "Fire-sale impact constant");
    cmd->add_option("--q", o.q, "Idiosyncratic default probability in (0, 1)");
    cmd->add_option("--assets", o.assets, "Initial assets per node");
    cmd->add_option("--liabilities", o.liabilities, "Liabilities per node");
}

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config_path, "JSON config file; explicit flags override it");
    cmd->add_option("--output", o.output, "Write CSV here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Default-cascade analytics: iterated-map solver, bifurcation geometry,\n"
                 "closed-form loss distributions and a finite-network Monte Carlo simulator."};
    app.require_subcommand(1);

    auto* solve = app.add_subcommand("solve", "Solve one scenario: thresholds and losses");
    add_model_flags(solve, o);
    add_common_flags(solve, o);
    solve->add_option("--z", o.z, "Market factor draw (default 0)");
    solve->add_option("--tol", o.tol, "Fixed-point tolerance (default 1e-12)");

    auto* orbit = app.add_subcommand("orbit", "Iterate the cascade map and emit the orbit");
    add_model_flags(orbit, o);
    add_common_flags(orbit, o);
    orbit->add_option("--z", o.z, "Market factor draw (default 0)");
    orbit->add_option("--tol", o.tol, "Convergence tolerance (default 1e-12)");
    orbit->add_option("--max-iter", o.max_iter, "Iteration cap (default 1e6)");

    auto* fps = app.add_subcommand("fixed-points", "Locate and classify all fixed points");
    add_model_flags(fps, o);
    add_common_flags(fps, o);
    fps->add_option("--z", o.z, "Market factor draw (default 0)");
    fps->add_option("--tol", o.tol, "Root tolerance (default 1e-12)");

    auto* bif = app.add_subcommand("bifurcation", "Report the multi-equilibrium geometry");
    add_common_flags(bif, o);
    bif->add_option("--kappa", o.kappa, "Feedback strength kappa");
    bif->add_option("--kappa-min", o.kappa_min, "Scan start");
    bif->add_option("--kappa-max", o.kappa_max, "Scan end");
    bif->add_option("--steps", o.steps, "Scan row count (>= 2)");

    auto* dist = app.add_subcommand("distribution", "Tabulate the loss CDF/PDF");
    add_model_flags(dist, o);
    add_common_flags(dist, o);
    dist->add_option("--kappa", o.kappa, "Feedback strength (overrides a/sigma/rho)");
    dist->add_option("--waves", o.waves, "Wave index: 'inf' (default) or k >= 1");
    dist->add_option("--grid-points", o.grid_points, "Grid size (default 201)");
    dist->add_option("--x-min", o.x_min, "Grid start in (0, 1) (default 1e-4)");
    dist->add_option("--x-max", o.x_max, "Grid end in (0, 1) (default 1-1e-4)");

    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo ensemble");
    add_model_flags(sim, o);
    add_common_flags(sim, o);
    sim->add_option("--n", o.n, "Node count");
    sim->add_option("--trials", o.trials, "Trial count");
    sim->add_option("--seed", o.seed, "Master seed (default 0)");
    sim->add_option("--threads", o.threads, "Worker threads (default 1)");
    sim->add_option("--z", o.z, "Pin the market factor for every trial");

    auto* cmp = app.add_subcommand("compare", "Ensemble vs analytic distribution (KS)");
    add_model_flags(cmp, o);
    add_common_flags(cmp, o);
    cmp->add_option("--n", o.n, "Node count");
    cmp->add_option("--trials", o.trials, "Trial count");
    cmp->add_option("--seed", o.seed, "Master seed (default 0)");
    cmp->add_option("--threads", o.threads, "Worker threads (default 1)");
    cmp->add_option("--waves", o.waves, "Analytic wave index: 'inf' (default) or k >= 1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        merge_from_json(o);
        if (solve->parsed()) return cmd_solve(o);
        if (orbit->parsed()) return cmd_orbit(o);
        if (fps->parsed()) return cmd_fixed_points(o);
        if (bif->parsed()) return cmd_bifurcation(o);
        if (dist->parsed()) return cmd_distribution(o);
        if (sim->parsed()) return cmd_simulate(o);
        if (cmp->parsed()) return cmd_compare(o);
    } catch (const casq::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
