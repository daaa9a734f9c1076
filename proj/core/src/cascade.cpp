#include "casq/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "casq/roots.hpp"

namespace casq {

namespace {

void require_finite(double x, const char* field) {
    if (!std::isfinite(x))
        throw std::domain_error(std::string(field) + ": must be finite");
}

void require_positive_tol(double tol, const char* who) {
    if (!(tol > 0.0))
        throw std::domain_error(std::string(who) + ": tol must be > 0");
}

// f(x) = x - kappa * N(x); fixed points of the cascade map solve f(x) = delta_1.
double f_of(double x, double kappa) { return x - kappa * std_normal_cdf(x); }

// Classifies a fixed point by the map slope F'(z) = kappa * phi(z).
Stability classify(double z, double kappa) {
    const double slope = kappa * std_normal_pdf(z);
    if (std::abs(slope - 1.0) <= 1e-9) return Stability::neutral;
    return slope < 1.0 ? Stability::stable : Stability::unstable;
}

}  // namespace

double kappa_critical() { return std::sqrt(2.0 * std::numbers::pi); }

ModelParams ModelParams::balance_sheet(double assets, double liabilities, double mu, double sigma,
                                       double rho, double a) {
    ModelParams p;
    p.mu = mu;
    p.sigma = sigma;
    p.rho = rho;
    p.a = a;
    p.assets = assets;
    p.liabilities = liabilities;
    p.validate();
    return p;
}

ModelParams ModelParams::idiosyncratic(Probability q, double sigma, double rho, double a,
                                       double mu) {
    ModelParams p;
    p.mu = mu;
    p.sigma = sigma;
    p.rho = rho;
    p.a = a;
    p.idio_q = q;
    p.validate();
    return p;
}

void ModelParams::validate() const {
    require_finite(mu, "mu");
    if (!(std::isfinite(sigma) && sigma > 0.0))
        throw std::domain_error("sigma: must be finite and > 0");
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::domain_error("rho: must lie in [0, 1)");
    if (!(std::isfinite(a) && a >= 0.0))
        throw std::domain_error("a: must be finite and >= 0");

    const bool has_sheet = assets.has_value() || liabilities.has_value();
    if (has_sheet && idio_q.has_value())
        throw std::domain_error("balance: give either assets/liabilities or q, not both");
    if (has_sheet) {
        if (!assets || !liabilities)
            throw std::domain_error("balance: assets and liabilities must be given together");
        if (!(std::isfinite(*assets) && *assets > 0.0))
            throw std::domain_error("assets: must be finite and > 0");
        if (!(std::isfinite(*liabilities) && *liabilities > 0.0 && *liabilities < *assets))
            throw std::domain_error("liabilities: must satisfy 0 < liabilities < assets");
    } else if (idio_q) {
        if (!(*idio_q > 0.0 && *idio_q < 1.0))
            throw std::domain_error("q: must lie in (0, 1)");
    } else {
        throw std::domain_error("balance: either assets/liabilities or q is required");
    }
}

ScenarioParams derive_scenario(const ModelParams& params, double z) {
    params.validate();
    require_finite(z, "z");

    ScenarioParams s;
    s.z = z;
    s.alpha = params.sigma * std::sqrt(1.0 - params.rho);
    s.beta = params.mu + params.sigma * std::sqrt(params.rho) * z;
    s.kappa = params.a / s.alpha;
    if (params.idio_q) {
        s.delta_1 = (std_normal_quantile(*params.idio_q) - std::sqrt(params.rho) * z) /
                    std::sqrt(1.0 - params.rho);
    } else {
        s.delta_1 = (std::log(*params.liabilities / *params.assets) - s.beta) / s.alpha;
    }
    return s;
}

double map_F(double x, const ScenarioParams& scenario) {
    require_finite(x, "x");
    return scenario.delta_1 + scenario.kappa * std_normal_cdf(x);
}

CascadeTrajectory run_orbit(double delta_1, double kappa, double tol, int max_iter) {
    require_positive_tol(tol, "run_orbit");
    if (max_iter < 1) throw std::domain_error("run_orbit: max_iter must be >= 1");
    require_finite(delta_1, "delta_1");
    require_finite(kappa, "kappa");

    CascadeTrajectory out;
    out.steps.push_back({1, delta_1, std_normal_cdf(delta_1)});
    for (int k = 2; k <= max_iter; ++k) {
        const CascadeStep prev = out.steps.back();  // push_back below may reallocate
        const double next = delta_1 + kappa * prev.q;
        out.steps.push_back({k, next, std_normal_cdf(next)});
        if (std::abs(next - prev.delta) < tol) {
            out.converged = true;
            break;
        }
    }
    out.delta_inf = out.steps.back().delta;
    out.iterations_used = static_cast<int>(out.steps.size());
    return out;
}

CascadeTrajectory run_orbit(const ScenarioParams& scenario, double tol, int max_iter) {
    return run_orbit(scenario.delta_1, scenario.kappa, tol, max_iter);
}

BifurcationGeometry bifurcation_geometry(double kappa) {
    if (!(std::isfinite(kappa) && kappa >= 0.0))
        throw std::domain_error("kappa: must be finite and >= 0");

    BifurcationGeometry g;
    g.kappa_0 = kappa_critical();
    g.x0 = g.x1 = g.y0 = g.y1 = g.x2 = std::numeric_limits<double>::quiet_NaN();
    // Exactly-critical kappa counts as single: the tangency has zero width.
    if (kappa <= g.kappa_0) {
        g.regime = Regime::single;
        return g;
    }
    g.regime = Regime::multi;
    g.x0 = std::sqrt(2.0 * std::log(kappa / g.kappa_0));
    g.x1 = -g.x0;
    g.y0 = f_of(g.x0, kappa);
    g.y1 = f_of(g.x1, kappa);
    // f increases from y0 on [x0, inf); the rebound abscissa is below y1 + kappa.
    g.x2 = find_root([&](double x) { return f_of(x, kappa) - g.y1; }, g.x0, g.y1 + kappa + 1.0,
                     {.xtol = 1e-12});
    return g;
}

FixedPointSet fixed_points(double delta_1, double kappa, double tol) {
    require_positive_tol(tol, "fixed_points");
    require_finite(delta_1, "delta_1");
    require_finite(kappa, "kappa");

    const auto geom = bifurcation_geometry(kappa);
    auto resid = [&](double x) { return f_of(x, kappa) - delta_1; };
    const RootOptions opt{.xtol = tol};

    std::vector<double> roots;
    if (geom.regime == Regime::single) {
        // f is nondecreasing: one root in [delta_1, delta_1 + kappa].
        roots.push_back(kappa == 0.0 ? delta_1
                                     : find_root(resid, delta_1, delta_1 + kappa + 1.0, opt));
    } else {
        // Roots sit on the monotone branches of f delimited by x1 and x0.
        if (delta_1 <= geom.y1) roots.push_back(find_root(resid, delta_1, geom.x1, opt));
        if (delta_1 >= geom.y0 && delta_1 <= geom.y1)
            roots.push_back(find_root(resid, geom.x1, geom.x0, opt));
        if (delta_1 >= geom.y0)
            roots.push_back(find_root(resid, geom.x0, delta_1 + kappa + 1.0, opt));
    }
    std::sort(roots.begin(), roots.end());

    FixedPointSet out;
    for (double r : roots) {
        // Collided pairs (tangency) come out of adjacent branches as numerically
        // identical roots; keep a single neutral point.
        if (!out.points.empty() && r - out.points.back().location <= 10.0 * tol) continue;
        out.points.push_back({r, classify(r, kappa)});
    }
    out.selected = out.points.front().location;
    return out;
}

FixedPointSet fixed_points(const ScenarioParams& scenario, double tol) {
    return fixed_points(scenario.delta_1, scenario.kappa, tol);
}

double total_loss_map_g(double delta_1, double kappa, double tol) {
    require_positive_tol(tol, "total_loss_map_g");
    require_finite(delta_1, "delta_1");
    if (kappa == 0.0) return delta_1;

    const auto geom = bifurcation_geometry(kappa);
    auto resid = [&](double x) { return f_of(x, kappa) - delta_1; };
    const RootOptions opt{.xtol = tol};
    if (geom.regime == Regime::single)
        return find_root(resid, delta_1, delta_1 + kappa + 1.0, opt);
    // The cascade settles on the leftmost branch while it exists (delta_1 <= y1,
    // with the boundary itself resolving to the colliding pair at x1), and on
    // the upper branch beyond x2 afterwards.
    if (delta_1 <= geom.y1) return find_root(resid, std::min(delta_1, geom.x1), geom.x1, opt);
    return find_root(resid, geom.x0, delta_1 + kappa + 1.0, opt);
}

double g_k(double delta_1, double kappa, int k) {
    if (k < 1) throw std::domain_error("k: must be >= 1");
    require_finite(delta_1, "delta_1");
    require_finite(kappa, "kappa");
    double g = delta_1;
    for (int j = 2; j <= k; ++j) g = delta_1 + kappa * std_normal_cdf(g);
    return g;
}

double g_k_prime(double delta_1, double kappa, int k) {
    if (k < 1) throw std::domain_error("k: must be >= 1");
    require_finite(delta_1, "delta_1");
    require_finite(kappa, "kappa");
    double g = delta_1;
    double gp = 1.0;
    for (int j = 2; j <= k; ++j) {
        gp = 1.0 + kappa * std_normal_pdf(g) * gp;
        g = delta_1 + kappa * std_normal_cdf(g);
    }
    return gp;
}

double h_k(double y, double kappa, int k, double tol) {
    require_positive_tol(tol, "h_k");
    require_finite(y, "y");
    if (k < 1) throw std::domain_error("k: must be >= 1");
    if (k == 1 || kappa == 0.0) return y;

    // t <= g_k(t) <= t + kappa brackets the preimage in [y - kappa, y].
    auto resid = [&](double t) { return g_k(t, kappa, k) - y; };
    const RootOptions opt{.xtol = 0.0, .ftol = tol};
    double lo = y - kappa, hi = y;
    for (int widening = 0;; ++widening) {
        try {
            return find_root(resid, lo, hi, opt);
        } catch (const numerical_error&) {
            if (widening >= 2) throw;
            lo -= kappa + 1.0;
            hi += kappa + 1.0;
        }
    }
}

double h_k_prime(double y, double kappa, int k, double tol) {
    if (k < 1) throw std::domain_error("k: must be >= 1");
    if (k == 1 || kappa == 0.0) return 1.0;
    return 1.0 / g_k_prime(h_k(y, kappa, k, tol), kappa, k);
}

double h_limit(double y, double kappa) {
    require_finite(y, "y");
    const auto geom = bifurcation_geometry(kappa);
    if (geom.regime == Regime::multi && y > geom.x1 && y < geom.x2) return geom.y1;
    return f_of(y, kappa);
}

double h_limit_prime(double y, double kappa) {
    require_finite(y, "y");
    const auto geom = bifurcation_geometry(kappa);
    // Half-open plateau: at x2 the right limit 1 - kappa*phi(x2) is reported.
    if (geom.regime == Regime::multi && y >= geom.x1 && y < geom.x2) return 0.0;
    return 1.0 - kappa * std_normal_pdf(y);
}

}  // namespace casq
