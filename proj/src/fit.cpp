#include <xpcs/fit.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <xpcs/error.hpp>
#include <xpcs/trajectory.hpp>

namespace xpcs {

namespace {

using Matrix = std::vector<double>;   // row-major, square

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
bool solve(Matrix a, std::vector<double> b, std::vector<double>& x)
{
    std::size_t const n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
        if (!(std::abs(a[piv * n + c]) > 0.0)) return false;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            double const f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return true;
}

bool invert(Matrix const& a, std::size_t n, Matrix& inv)
{
    inv.assign(n * n, 0.0);
    std::vector<double> e(n), col;
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        if (!solve(a, e, col)) return false;
        for (std::size_t i = 0; i < n; ++i) inv[i * n + j] = col[i];
    }
    return true;
}

struct Samples
{
    std::vector<double> tau;
    std::vector<double> y;
};

Samples select_window(std::span<double const> tau, std::span<double const> value, FitWindow const& w,
                      DecayFit& fit)
{
    if (tau.size() != value.size()) throw ArgumentError("decay fit: τ and value lengths differ");
    Samples s;
    if (w.tau_lo || w.tau_hi) {
        double const lo = w.tau_lo.value_or(-INFINITY);
        double const hi = w.tau_hi.value_or(INFINITY);
        for (std::size_t i = 0; i < tau.size(); ++i)
            if (tau[i] >= lo && tau[i] <= hi && std::isfinite(value[i])) {
                s.tau.push_back(tau[i]);
                s.y.push_back(value[i]);
            }
        return s;
    }
    std::size_t i = 0;
    while (i < tau.size() && !(std::isfinite(value[i]) && value[i] <= w.value_hi)) ++i;
    if (i == tau.size()) {
        fit.flagged = true;
        fit.message = "non-decaying: no point falls below " + std::to_string(w.value_hi);
        return s;
    }
    for (; i < tau.size(); ++i) {
        if (!std::isfinite(value[i]) || value[i] < w.value_lo || value[i] > w.value_hi) break;
        s.tau.push_back(tau[i]);
        s.y.push_back(value[i]);
    }
    return s;
}

/// Model value and gradient with respect to the parameter vector.
using ModelFn = std::function<double(std::vector<double> const&, double, double*)>;

struct LmResult
{
    std::vector<double> x;
    Matrix covariance;
    double ssr = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

LmResult levenberg_marquardt(Samples const& s, std::vector<double> x, ModelFn const& model,
                             std::function<void(std::vector<double>&)> const& clamp, std::size_t max_iterations,
                             double step_tolerance)
{
    std::size_t const p = x.size();
    std::size_t const n = s.tau.size();
    std::vector<double> grad(p);
    auto ssr_of = [&](std::vector<double> const& v) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = s.y[i] - model(v, s.tau[i], nullptr);
            sum += r * r;
        }
        return sum;
    };
    auto normal_equations = [&](std::vector<double> const& v, Matrix& a, std::vector<double>& g) {
        a.assign(p * p, 0.0);
        g.assign(p, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double const r = s.y[i] - model(v, s.tau[i], grad.data());
            for (std::size_t j = 0; j < p; ++j) {
                g[j] += grad[j] * r;
                for (std::size_t k = 0; k < p; ++k) a[j * p + k] += grad[j] * grad[k];
            }
        }
    };

    LmResult res;
    double ssr = ssr_of(x);
    double lambda = 1e-3;
    Matrix a;
    std::vector<double> g, step;
    for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
        normal_equations(x, a, g);
        bool accepted = false;
        while (lambda < 1e20) {
            Matrix damped = a;
            for (std::size_t j = 0; j < p; ++j) damped[j * p + j] += lambda * std::max(a[j * p + j], 1e-300);
            if (!solve(damped, g, step)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> trial(p);
            for (std::size_t j = 0; j < p; ++j) trial[j] = x[j] + step[j];
            clamp(trial);
            double const trial_ssr = ssr_of(trial);
            if (trial_ssr <= ssr) {
                bool small = true;
                for (std::size_t j = 0; j < p; ++j)
                    if (std::abs(trial[j] - x[j]) > step_tolerance * (std::abs(x[j]) + step_tolerance)) small = false;
                x = trial;
                ssr = trial_ssr;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (small) res.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // no downhill step exists at machine precision: x is a minimum
            res.converged = true;
            break;
        }
        if (res.converged) break;
    }
    res.x = x;
    res.ssr = ssr;
    normal_equations(x, a, g);
    Matrix inv;
    if (n > p && invert(a, p, inv)) {
        double const s2 = ssr / double(n - p);
        for (double& v : inv) v *= s2;
        res.covariance = inv;
    } else {
        res.covariance.assign(p * p, NAN);
    }
    return res;
}

/// log-linear estimate of Γ from points with y > 0.
double initial_rate(Samples const& s)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.tau.size(); ++i)
        if (s.y[i] > 0.0) {
            num += s.tau[i] * std::log(s.y[i]);
            den += s.tau[i] * s.tau[i];
        }
    double g = den > 0.0 ? -num / (2.0 * den) : 0.0;
    if (!(g > 0.0)) {
        double mean_tau = 0.0;
        for (double t : s.tau) mean_tau += t;
        mean_tau /= double(std::max<std::size_t>(1, s.tau.size()));
        g = mean_tau > 0.0 ? 1.0 / mean_tau : 1.0;
    }
    return g;
}

void finish(DecayFit& fit, Samples const& s)
{
    fit.points = s.tau.size();
    if (!s.tau.empty()) {
        fit.tau_lo = *std::min_element(s.tau.begin(), s.tau.end());
        fit.tau_hi = *std::max_element(s.tau.begin(), s.tau.end());
    }
}

bool check_points(DecayFit& fit, Samples const& s)
{
    finish(fit, s);
    if (fit.flagged) return false;
    if (s.tau.size() < 4) {
        fit.flagged = true;
        fit.message = "only " + std::to_string(s.tau.size()) + " points in the fit window (need 4)";
        return false;
    }
    return true;
}

} // namespace

DecayFit fit_exponential(std::span<double const> tau, std::span<double const> value, DecayFitOptions const& options)
{
    DecayFit fit;
    Samples const s = select_window(tau, value, options.window, fit);
    if (!check_points(fit, s)) return fit;

    if (options.log_domain) {
        // ln y = ln A - 2Γτ
        Samples ls;
        for (std::size_t i = 0; i < s.tau.size(); ++i)
            if (s.y[i] > 0.0) {
                ls.tau.push_back(s.tau[i]);
                ls.y.push_back(std::log(s.y[i]));
            }
        std::size_t const n = ls.tau.size();
        if (n < 4) {
            fit.flagged = true;
            fit.message = "fewer than 4 positive points for the log-domain fit";
            return fit;
        }
        double stt = 0.0, sty = 0.0, st = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            stt += ls.tau[i] * ls.tau[i];
            sty += ls.tau[i] * ls.y[i];
            st += ls.tau[i];
            sy += ls.y[i];
        }
        double slope, intercept = 0.0;
        if (options.free_amplitude) {
            double const det = double(n) * stt - st * st;
            slope = (double(n) * sty - st * sy) / det;
            intercept = (sy - slope * st) / double(n);
        } else {
            slope = sty / stt;
        }
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = ls.y[i] - intercept - slope * ls.tau[i];
            ssr += r * r;
        }
        std::size_t const p = options.free_amplitude ? 2 : 1;
        double const s2 = n > p ? ssr / double(n - p) : NAN;
        double const var_slope = options.free_amplitude ? s2 * double(n) / (double(n) * stt - st * st) : s2 / stt;
        fit.gamma = -slope / 2.0;
        fit.amplitude = std::exp(intercept);
        fit.gamma_err = std::sqrt(var_slope) / 2.0;
        fit.covariance = {fit.gamma_err * fit.gamma_err};
        fit.residual_norm = std::sqrt(ssr);
        fit.converged = true;
    } else {
        bool const free_a = options.free_amplitude;
        ModelFn model = [free_a](std::vector<double> const& x, double t, double* grad) {
            double const a = free_a ? x[1] : 1.0;
            double const e = std::exp(-2.0 * x[0] * t);
            if (grad) {
                grad[0] = -2.0 * t * a * e;
                if (free_a) grad[1] = e;
            }
            return a * e;
        };
        std::vector<double> x0{initial_rate(s)};
        if (free_a) x0.push_back(1.0);
        auto lm = levenberg_marquardt(s, x0, model, [](std::vector<double>&) {}, options.max_iterations,
                                      options.step_tolerance);
        fit.gamma = lm.x[0];
        fit.amplitude = free_a ? lm.x[1] : 1.0;
        fit.covariance = lm.covariance;
        fit.gamma_err = std::sqrt(lm.covariance[0]);
        fit.residual_norm = std::sqrt(lm.ssr);
        fit.iterations = lm.iterations;
        fit.converged = lm.converged;
    }
    if (!(fit.gamma > 0.0)) {
        fit.flagged = true;
        fit.message = "non-decaying: fitted Γ <= 0";
    } else if (!fit.converged) {
        fit.flagged = true;
        fit.message = "no convergence within the iteration limit";
    }
    return fit;
}

DecayFit fit_stretched(std::span<double const> tau, std::span<double const> value, DecayFitOptions const& options)
{
    DecayFitOptions simple = options;
    simple.log_domain = false;
    DecayFit const start = fit_exponential(tau, value, simple);
    DecayFit fit;
    Samples const s = select_window(tau, value, options.window, fit);
    if (!check_points(fit, s)) return fit;

    bool const free_a = options.free_amplitude;
    ModelFn model = [free_a](std::vector<double> const& x, double t, double* grad) {
        double const a = free_a ? x[2] : 1.0;
        double const gt = x[0] * t;
        double const u = gt > 0.0 ? std::pow(gt, x[1]) : 0.0;
        double const e = std::exp(-2.0 * u);
        if (grad) {
            grad[0] = gt > 0.0 ? a * e * (-2.0) * x[1] * u / x[0] : 0.0;
            grad[1] = gt > 0.0 ? a * e * (-2.0) * u * std::log(gt) : 0.0;
            if (free_a) grad[2] = e;
        }
        return a * e;
    };
    std::vector<double> x0{start.gamma > 0.0 ? start.gamma : initial_rate(s), 1.0};
    if (free_a) x0.push_back(start.amplitude > 0.0 ? start.amplitude : 1.0);
    auto clamp = [](std::vector<double>& x) {
        x[0] = std::max(x[0], 1e-300);
        x[1] = std::clamp(x[1], 1e-6, 2.0);
    };
    auto lm = levenberg_marquardt(s, x0, model, clamp, options.max_iterations, options.step_tolerance);
    std::size_t const p = x0.size();
    fit.gamma = lm.x[0];
    fit.stretch = lm.x[1];
    fit.amplitude = free_a ? lm.x[2] : 1.0;
    fit.covariance = lm.covariance;
    fit.gamma_err = std::sqrt(lm.covariance[0]);
    fit.stretch_err = std::sqrt(lm.covariance[p + 1]);
    fit.residual_norm = std::sqrt(lm.ssr);
    fit.iterations = lm.iterations;
    fit.converged = lm.converged;
    if (!lm.converged) {
        fit.flagged = true;
        fit.message = "no convergence within " + std::to_string(options.max_iterations) +
                      " iterations (best residual " + std::to_string(fit.residual_norm) + ")";
    } else if (!(fit.gamma > 0.0)) {
        fit.flagged = true;
        fit.message = "non-decaying: fitted Γ <= 0";
    }
    return fit;
}

// ---- dispersion -----------------------------------------------------------------

std::optional<double> DispersionCurve::rough_diffusivity() const
{
    if (!gamma0 || !q_min) return std::nullopt;
    return *gamma0 / (*q_min * *q_min);
}

namespace {

DispersionCurve build_dispersion(std::span<double const> q, std::vector<double> gamma, std::vector<double> err,
                                 std::vector<double> stretch)
{
    std::size_t const n = q.size();
    if (n < 3) throw InsufficientData("dispersion: need at least 3 rings");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
    DispersionCurve c;
    for (std::size_t i : order) {
        if (!c.q.empty() && !(q[i] > c.q.back())) throw ArgumentError("dispersion: duplicate q values");
        c.q.push_back(q[i]);
        c.gamma.push_back(gamma[i]);
        c.gamma_err.push_back(err[i]);
        c.stretch.push_back(stretch[i]);
    }
    auto const& g = c.gamma;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(g[i] < g[i - 1])) continue;
        std::size_t j = i;
        while (j + 1 < n && g[j + 1] == g[i]) ++j;
        if (j + 1 < n && g[j + 1] > g[i]) {
            c.gamma0 = g[i];
            c.q_min = c.q[i];
            break;
        }
        i = j;
    }
    if (c.gamma0 && *c.gamma0 > 0.0) {
        for (double v : g) c.normalized.push_back(v / *c.gamma0);
    } else {
        c.gamma0.reset();
        c.q_min.reset();
        c.warning = "no interior local minimum of Γ(q); Γ0 left unset";
    }
    return c;
}

} // namespace

DispersionCurve dispersion(std::span<double const> q, std::span<DecayFit const> fits)
{
    if (q.size() != fits.size()) throw ArgumentError("dispersion: q and fit counts differ");
    std::vector<double> g, e, s;
    for (auto const& f : fits) {
        g.push_back(f.gamma);
        e.push_back(f.gamma_err);
        s.push_back(f.stretch);
    }
    return build_dispersion(q, g, e, s);
}

DispersionCurve dispersion(std::span<double const> q, std::span<double const> gamma)
{
    if (q.size() != gamma.size()) throw ArgumentError("dispersion: q and Γ counts differ");
    return build_dispersion(q, std::vector<double>(gamma.begin(), gamma.end()), std::vector<double>(q.size(), 0.0),
                            std::vector<double>(q.size(), 1.0));
}

// ---- diffusivity ------------------------------------------------------------------

double DiffusivityFit::d_um2_per_s() const { return d * kAngstrom2PerPsToMicron2PerS; }

DiffusivityFit fit_diffusivity(DispersionCurve const& curve, DiffusivityMode mode, std::optional<double> q_cutoff,
                               bool pin_d2_to_zero)
{
    DiffusivityFit fit;
    fit.mode = mode;
    std::vector<double> q, g;
    for (std::size_t i = 0; i < curve.q.size(); ++i) {
        if (mode == DiffusivityMode::LowQ && q_cutoff && curve.q[i] > *q_cutoff) continue;
        if (!std::isfinite(curve.gamma[i])) continue;
        q.push_back(curve.q[i]);
        g.push_back(curve.gamma[i]);
    }
    std::size_t const n = q.size();
    fit.points = n;
    if (n < 3) throw InsufficientData("fit_diffusivity: need at least 3 points (have " + std::to_string(n) + ")");
    fit.q_lo = q.front();
    fit.q_hi = q.back();

    bool const quartic = mode == DiffusivityMode::Quartic && !pin_d2_to_zero;
    std::size_t const p = quartic ? 2 : 1;
    // basis q², q⁴
    Matrix a(p * p, 0.0);
    std::vector<double> b(p, 0.0), x;
    for (std::size_t i = 0; i < n; ++i) {
        double const phi[2] = {q[i] * q[i], q[i] * q[i] * q[i] * q[i]};
        for (std::size_t j = 0; j < p; ++j) {
            b[j] += phi[j] * g[i];
            for (std::size_t k = 0; k < p; ++k) a[j * p + k] += phi[j] * phi[k];
        }
    }
    if (!solve(a, b, x)) throw InsufficientData("fit_diffusivity: singular normal equations");
    fit.d = x[0];
    fit.d2 = quartic ? x[1] : 0.0;
    double ssr = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double const q2 = q[i] * q[i];
        double const r = g[i] - fit.d * q2 - fit.d2 * q2 * q2;
        ssr += r * r;
        sg += g[i] * g[i];
    }
    fit.relative_rms = sg > 0.0 ? std::sqrt(ssr / sg) : 0.0;
    Matrix inv;
    if (n > p && invert(a, p, inv)) {
        double const s2 = ssr / double(n - p);
        for (double& v : inv) v *= s2;
        fit.covariance = inv;
        fit.d_err = std::sqrt(inv[0]);
        if (quartic) fit.d2_err = std::sqrt(inv[3]);
    }
    if (!(fit.d > 0.0)) {
        fit.flagged = true;
        fit.message = "fitted D is not positive";
    }
    return fit;
}

} // namespace xpcs
