#include "tauber/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"

namespace tauber {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neumaier {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

std::vector<double> fit_knots(const FitWindow& w) {
    if (!(w.s_min > 0.0 && w.s_max > w.s_min)) throw SpecError("fit window needs 0 < s_min < s_max");
    if (!(w.margin > 1.0)) throw SpecError("fit margin must exceed 1");
    std::vector<double> knots{0.0};
    for (double s : logspace(w.s_min, w.s_max, decade_count(w.s_min, w.s_max, w.knots_per_decade))) knots.push_back(s);
    return knots;
}

RateExpr envelope_or_constant(const std::vector<double>& knots, const std::vector<double>& values) {
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
        return RateExpr::constant(values.front());
    return RateExpr::piecewise_linear(knots, values);
}

}  // namespace

void DiagonalSystem::validate() const {
    const std::size_t n = xi.size();
    if (a.size() != n) throw SpecError("diagonal system: xi and a differ in length");
    if (!P1.empty() && P1.size() != n) throw SpecError("diagonal system: P1 has the wrong length");
    if (!P2.empty() && P2.size() != n) throw SpecError("diagonal system: P2 has the wrong length");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xi[i] >= 0.0) || (i > 0 && !(xi[i] > xi[i - 1]))) throw SpecError("diagonal system: xi must increase from 0");
        if (!(a[i] < 0.0)) throw SpecError("diagonal system: abscissas must be negative");
        if (!(p1(i) >= 0.0 && p1(i) <= 1.0) || !(p2(i) >= 0.0 && p2(i) <= 1.0))
            throw SpecError("diagonal system: weights must lie in [0, 1]");
    }
    if (!invertible_generator && !(omega > 0.0)) throw SpecError("diagonal system: omega must be positive");
    if (m < 0) throw SpecError("diagonal system: smoothing order must be nonnegative");
}

nlohmann::json DiagonalSystem::to_json() const {
    return {{"xi", xi}, {"a", a},     {"P1", P1}, {"P2", P2}, {"omega", omega},
            {"m", m},   {"invertible_generator", invertible_generator}};
}

DiagonalSystem DiagonalSystem::from_json(const nlohmann::json& j) {
    DiagonalSystem s;
    try {
        s.xi = j.at("xi").get<std::vector<double>>();
        s.a = j.at("a").get<std::vector<double>>();
        s.P1 = j.value("P1", std::vector<double>{});
        s.P2 = j.value("P2", std::vector<double>{});
        s.omega = j.value("omega", 1.0);
        s.m = j.value("m", 1);
        s.invertible_generator = j.value("invertible_generator", false);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed diagonal system: ") + e.what());
    }
    s.validate();
    return s;
}

DiagonalSystem polynomial_system(std::size_t n, double xi_min, double xi_max) {
    DiagonalSystem s;
    s.xi = logspace(xi_min, xi_max, n);
    s.a.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.a[i] = -1.0 / (2.0 + s.xi[i]);
    return s;
}

double truncated_resolvent_norm(const DiagonalSystem& sys, std::complex<double> z) {
    double best = 0.0;
    for (std::size_t n = 0; n < sys.size(); ++n) {
        const double d = std::abs(z - sys.lambda(n));
        if (d == 0.0) throw PoleError("truncated_resolvent_norm: z is an eigenvalue");
        best = std::max(best, sys.p2(n) * sys.p1(n) / d);
    }
    return best;
}

double slice_sup(const DiagonalSystem& sys, double M_s, double s) {
    double best = 0.0;
    for (std::size_t n = 0; n < sys.size(); ++n) {
        const double w = sys.p2(n) * sys.p1(n);
        if (w == 0.0) continue;
        const double d = std::hypot(std::max(0.0, -sys.a[n] - 1.0 / M_s), s - sys.xi[n]);
        best = std::max(best, d == 0.0 ? kInf : w / d);
    }
    return best;
}

FittedRates fit_M_K(const DiagonalSystem& sys, const FitWindow& window) {
    sys.validate();
    const auto knots = fit_knots(window);
    const std::size_t nk = knots.size();

    // M on [s_i, s_{i+1}] covers every mode with xi_n <= s_{i+1}; the last knot covers all.
    std::vector<double> M(nk, 2.0);
    {
        double need = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < nk; ++i) {
            const double upto = i + 1 < nk ? knots[i + 1] : kInf;
            while (n < sys.size() && sys.xi[n] <= upto) need = std::max(need, -1.0 / sys.a[n++]);
            M[i] = std::max(2.0, window.margin * need);
        }
    }

    // Interval bound of the slice sup on [s_i, s_{i+1}]: M is smallest at s_i, so the
    // horizontal gap to each eigenvalue is smallest there.
    std::vector<double> K(nk, 2.0);
    double run = 2.0;
    for (std::size_t i = 0; i < nk; ++i) {
        const double lo = knots[i];
        const double hi = i + 1 < nk ? knots[i + 1] : kInf;
        double ub = 0.0;
        for (std::size_t n = 0; n < sys.size(); ++n) {
            const double w = sys.p2(n) * sys.p1(n);
            if (w == 0.0) continue;
            const double gap = std::max(0.0, -sys.a[n] - 1.0 / M[i]);
            const double dist = sys.xi[n] < lo ? lo - sys.xi[n] : (sys.xi[n] > hi ? sys.xi[n] - hi : 0.0);
            const double d = std::hypot(gap, dist);
            ub = std::max(ub, d == 0.0 ? kInf : w / d);
        }
        run = std::max(run, ub);
        K[i] = run;
    }
    return {envelope_or_constant(knots, M), envelope_or_constant(knots, K), knots};
}

std::vector<std::complex<double>> gaussian_modes(std::size_t n, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) {
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        v = std::polar(r, 2.0 * std::numbers::pi * uniform()) * std::sqrt(0.5);
    }
    return x;
}

double orbit_norm(const DiagonalSystem& sys, const std::vector<std::complex<double>>& x, double t) {
    if (t < 0.0) throw DomainError("orbit_norm: t must be nonnegative");
    if (x.size() != sys.size()) throw SpecError("orbit_norm: x has the wrong length");
    Neumaier acc;
    for (std::size_t n = 0; n < sys.size(); ++n) {
        const double amp = sys.p2(n) * sys.p1(n) * std::abs(x[n]);
        if (amp == 0.0) continue;
        const std::complex<double> shift = sys.invertible_generator ? -sys.lambda(n) : sys.omega - sys.lambda(n);
        // log of the squared term, so large m and t cannot overflow or underflow prematurely
        const double lg = 2.0 * (std::log(amp) + sys.a[n] * t - sys.m * std::log(std::abs(shift)));
        acc.add(std::exp(lg));
    }
    return std::sqrt(acc.value());
}

VerificationReport corollary_check(const DiagonalSystem& sys, const std::vector<std::complex<double>>& x,
                                   const EnvelopeSpec& spec, const std::vector<double>& t_grid) {
    spec.validate();
    if (t_grid.size() < 2 || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw SpecError("corollary_check: t grid must be sorted with at least two points");
    VerificationReport rep("corollary");
    const RateExpr mk = spec.mk();
    const double half = 0.5 * t_grid.back();
    const bool sup_mode = std::isinf(spec.p);

    double sup_full = 0.0, sup_half = 0.0, worst_at = t_grid.front();
    Neumaier int_full, int_half;
    double prev_t = 0.0, prev_v = 0.0;
    bool have_prev = false;
    for (double t : t_grid) {
        const auto w = w_of(mk, spec.c1 * t);
        if (w.saturated) {
            rep.count_skipped();
            continue;
        }
        const double orbit = orbit_norm(sys, x, t);
        const double weighted = std::pow(w.value, spec.m) * orbit;
        rep.add_row({"weighted_orbit", t, orbit, std::pow(w.value, -spec.m), weighted, std::isfinite(weighted)});
        if (weighted > sup_full) sup_full = weighted, worst_at = t;
        if (t <= half) sup_half = std::max(sup_half, weighted);
        if (!sup_mode) {
            const double v = std::pow(weighted, spec.p);
            if (have_prev) {
                const double piece = 0.5 * (t - prev_t) * (v + prev_v);
                int_full.add(piece);
                if (t <= half) int_half.add(piece);
            }
            prev_t = t, prev_v = v, have_prev = true;
        }
    }
    if (rep.skipped() > 0) rep.flag("envelope saturated at " + std::to_string(rep.skipped()) + " points");

    const double full = sup_mode ? sup_full : std::pow(int_full.value(), 1.0 / spec.p);
    const double part = sup_mode ? sup_half : std::pow(int_half.value(), 1.0 / spec.p);
    const double growth = part > 0.0 ? full / part : (full == 0.0 ? 1.0 : kInf);
    const double allowed = sup_mode ? 1.0 + 1e-6 : 1.1;
    rep.observe(sup_mode ? "weighted_sup" : "weighted_Lp", full, worst_at, std::isfinite(full));
    rep.observe("half_horizon", part, half, std::isfinite(part));
    rep.observe("horizon_growth", growth, t_grid.back(), growth <= allowed);
    return rep;
}

double wave_rate(const WaveRateInput& inp, double t, double tol) {
    if (t < 0.0) throw DomainError("wave_rate: t must be nonnegative");
    const auto w = w_of(inp.Mtilde, inp.c1 * t, tol);
    return inp.C / std::pow(w.value, inp.m);
}

EnvelopeSpec wave_envelope_spec(const WaveRateInput& inp) {
    if (!(inp.delta > 0.0) || !(inp.C > 0.0) || !(inp.c1 > 0.0)) throw SpecError("wave input needs delta, C, c1 > 0");
    EnvelopeSpec s;
    const double Mc = std::max(2.0, 1.0 / inp.delta);
    s.M = RateExpr::constant(Mc);
    s.K = RateExpr::max({RateExpr::constant(2.0), RateExpr::scale(inp.C, RateExpr::exp(RateExpr::scale(inp.C, inp.Mtilde)))});
    s.m = inp.m;
    s.c1 = inp.c1 * Mc * inp.C;
    s.validate();
    return s;
}

VerificationReport check_wave_input(const WaveRateInput& inp, double s_max) {
    VerificationReport rep("wave_input");
    std::vector<double> grid{0.0};
    for (double s : logspace(1e-3, s_max, decade_count(1e-3, s_max))) grid.push_back(s);
    double c = kInf, at = 0.0;
    for (double s : grid) {
        const double r = inp.Mtilde(s) / std::log(2.0 + s);
        if (r < c) c = r, at = s;
    }
    rep.observe("c_log", c, at, std::isfinite(c) && c > 0.0);
    return rep;
}

}  // namespace tauber
