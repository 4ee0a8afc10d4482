// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hp_oracle.hpp"
#include "tauber/bridge.hpp"
#include "tauber/cli.hpp"
#include "tauber/decomposition.hpp"
#include "tauber/extremal.hpp"
#include "tauber/grid.hpp"
#include "tauber/mollifier.hpp"
#include "tauber/rate_algebra.hpp"
#include "tauber/semigroup.hpp"

using namespace tauber;
using cd = std::complex<double>;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

EnvelopeSpec std_pair() {
    EnvelopeSpec s;
    s.M = RateExpr::constant(2.0);
    s.K = RateExpr::power_shift(2.0, 1.0, 1.0);
    return s;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::abs(b); }

Lemma42Grid doubled(Lemma42Grid g) {
    g.n_eta *= 2;
    g.n_theta = 2 * g.n_theta - 1;
    g.n_t *= 2;
    return g;
}

SampledSignal sampled(double dt, double T, const std::function<double(double)>& f) {
    const auto n = static_cast<std::size_t>(std::llround(T / dt)) + 1;
    return SampledSignal::from_function(0.0, dt, n, [&f](double t) { return cplx(f(t), 0.0); });
}

const SampledSignal& default_phi() {
    static const SampledSignal phi = phi_from_psi(build_psi(BumpSpec{}), -200.0, 0.05, 8001);
    return phi;
}

Outcome roots_of_unity() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = roots_of_unity_check(50, 100, 20240917);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(rep.pass(), "max_rel_error < 1e-9");
    o.require(secs < 1.0, "runtime < 1 s");
    o.note("max rel err " + num(rep.value("max_rel_error")) + ", " + num(secs) + " s");
    return o;
}

Outcome stable_evaluators() {
    Outcome o;
    const auto spec = std_pair();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int k = 2; k <= 20; k += 3) {
        const auto p = make_params(k, 1.0, 2.0, 1.0, spec);
        for (int i = 0; i < 20; ++i) {
            const cd dz = std::polar((0.5 + U(rng)) / p.A, 2.0 * M_PI * U(rng));
            worst = std::max(worst, rel(cauchy_transform_offset(p, dz).value(), oracle::cauchy(p, dz)));
            const double t = 1e-3 + 3.0 * p.A * U(rng);
            worst = std::max(worst, rel(laplace_transform(p, t), oracle::laplace(p, t, 0)));
            worst = std::max(worst, rel(laplace_deriv(p, t), oracle::laplace(p, t, 1)));
        }
    }
    o.require(worst < 1e-8, "rel err < 1e-8 for k <= 20");

    long trips = 0;
    for (int k : {50, 200, 1000}) {
        const auto p = make_params(k, 1.0, 2.0, 1.0, spec);
        RangeMonitor mon;
        for (double t : linspace(0.0, 3.0 * p.A, 301)) {
            laplace_transform_log(p, t, &mon);
            laplace_deriv_log(p, t, &mon);
        }
        for (double eta : linspace(-5.0, 5.0, 41))
            for (double th : {0.0, 0.5, 1.0}) cauchy_transform_offset(p, cd(p.delta - th / 2.0, eta), &mon);
        trips += mon.trips;
    }
    o.require(trips == 0, "no monitor trips up to k = 1000");
    o.note("worst rel err " + num(worst) + ", trips " + std::to_string(trips));
    return o;
}

Outcome measure_estimates() {
    Outcome o;
    const auto spec = std_pair();
    for (int k : {20, 40, 80}) {
        const auto p = make_params(k, 1.0, 2.0, 1.0, spec);
        const auto a = verify_lemma42(p, spec);
        const auto b = verify_lemma42(p, spec, doubled({}));
        const std::string tag = "k=" + std::to_string(k) + " ";
        for (const char* name : {"C_cauchy", "C_deriv", "C_laplace"}) {
            const double va = a.value(name), vb = b.value(name);
            o.require(std::isfinite(va) && std::isfinite(vb), tag + name + " finite");
            o.require(std::abs(vb / va - 1.0) < 0.2, tag + name + " drift < 20%");
        }
        // Observed, not gated: the pair does not meet the growth condition the off-band Laplace
        // estimate relies on, so its constant grows with k.
        o.require(std::isfinite(a.value("eps_laplace")), tag + "eps_laplace finite");
        o.require(a.value("c_lower") > 0.0, tag + "c > 0");
        if (k >= 60) o.require(a.value("eps_cauchy") < 1e-6, tag + "off-band < 1e-6");
        o.note(tag + "c " + num(a.value("c_lower")) + " C_cauchy " + num(a.value("C_cauchy")));
    }
    return o;
}

Outcome extremal_checkpoints() {
    Outcome o;
    const auto f = build_extremal(std_pair(), 1.0, 2.0, 1.0, 1e-3, 4);
    o.require(f.measures.size() == 4, "four terms built");
    const auto rep = verify_extremal(f);
    o.require(rep.value("c_checkpoints") > 0.0, "c > 0 at checkpoints");
    o.require(std::isfinite(rep.value("fhat_ratio")), "transform ratio finite");
    o.note("c " + num(rep.value("c_checkpoints")) + ", ratio " + num(rep.value("fhat_ratio")));
    return o;
}

Outcome rate_algebra() {
    Outcome o;
    const auto shift = RateExpr::power_shift(2.0, 1.0, 1.0);
    const std::vector<RateExpr> fs{
        shift,
        RateExpr::power_shift(2.0, 3.0, 0.5),
        RateExpr::log_shift(2.0, 1.0),
        RateExpr::exp(RateExpr::power_shift(std::log(2.0), 1.0, 1.0)),
        RateExpr::product({shift, RateExpr::log_shift(1.0, 1.0)}),
    };
    double worst = 0.0;
    for (const auto& f : fs)
        for (double s : logspace(1.0, 300.0, 50)) worst = std::max(worst, std::abs(w_of(f, f(s)).value - s) / s);
    o.require(worst < 1e-8, "round trip < 1e-8");
    const auto rep = check_K_aux(std_pair(), 100.0, 257);
    o.require(rep.value("delta_hat") >= 0.9, "delta_hat >= 0.9");
    o.note("round trip " + num(worst) + ", delta_hat " + num(rep.value("delta_hat")));
    return o;
}

Outcome mollifier() {
    Outcome o;
    BumpSpec s;
    const auto psi = build_psi(s);
    o.require(psi.values[psi.size() / 2].real() == 1.0, "psi(0) = 1");

    BumpSpec narrow;
    narrow.n_boxes = 4;
    narrow.widths = {0.3, 0.2, 0.15, 0.1};
    bool contained = true;
    for (const auto& spec : {s, narrow}) {
        const auto p = build_psi(spec);
        double sum = 0.0;
        for (double a : spec.resolved_widths()) sum += a;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (std::abs(p.t(i)) >= sum && p.values[i] != cplx(0.0)) contained = false;
    }
    o.require(contained, "support containment");

    DerivativeCheckOptions opt;
    opt.j_max = 6;
    const auto r1 = check_derivative_bounds(psi, s, opt);
    o.require(r1.pass() && r1.value("box_bound") <= 1.0, "box bound for j <= 6");
    BumpSpec fine = s;
    fine.grid_n = 2 * s.grid_n - 1;
    const auto r2 = check_derivative_bounds(build_psi(fine), fine, opt);
    const double drift = std::abs(r2.value("C1") / r1.value("C1") - 1.0);
    o.require(drift < 0.05, "C1 drift < 5%");
    o.note("box ratio " + num(r1.value("box_bound")) + ", C1 " + num(r1.value("C1")) + ", drift " + num(drift));
    return o;
}

Outcome decomposition() {
    Outcome o;
    const std::vector<std::function<double(double)>> signals{
        [](double t) { return std::exp(-t); },
        [](double t) { return std::sin(t); },
        [](double t) { return t / (1.0 + t) * std::cos(0.3 * t); },
    };
    double worst = 0.0;
    for (const auto& g : signals) {
        const auto f = sampled(0.01, 400.0, g);
        for (int m : {1, 2}) {
            const auto rep = reconstruction_check(f, decompose(f, default_phi(), 2.0, m));
            worst = std::max(worst, rep.value("sup_error"));
        }
    }
    o.require(worst < 1e-6, "J1 + J2 = f to 1e-6");

    double C[2];
    int i = 0;
    for (double dt : {0.02, 0.01}) {
        const auto f = sampled(dt, 400.0, [](double t) { return std::sin(t); });
        const auto rep = check_lemma21(f, nullptr, default_phi(), 1, {1.0, 2.0, 4.0, 8.0}, 0.0, 400.0);
        o.require(rep.pass(), "majorant constant finite");
        C[i++] = rep.value("C");
    }
    const double drift = std::abs(C[1] / C[0] - 1.0);
    o.require(drift < 0.1, "majorant constant drift < 10%");

    const auto mass = poisson_mass_check(logspace(1e-3, 1e3, 61));
    o.require(mass.pass(), "Poisson mass within 1e-6");
    o.note("reconstruction " + num(worst) + ", C " + num(C[1]) + ", drift " + num(drift) + ", mass dev " +
           num(mass.value("max_deviation")));
    return o;
}

Outcome bridge() {
    Outcome o;
    const auto shift = RateExpr::power_shift(2.0, 1.0, 1.0);
    const auto two = RateExpr::constant(2.0);

    HypothesisSide four;
    four.side = Side::Fourier;
    four.M = two;
    four.K = shift;
    const auto half = fourier_to_laplace(four, 0.5);
    bool exact = true;
    for (double s : {0.0, 1.0, 7.5, 1e3}) exact = exact && half.M(s) == 4.0 && half.K(s) == 2.0 * shift(s);
    o.require(exact, "eps = 1/2 scaling");

    auto lap = [](RateExpr M, RateExpr K, double C, double Cp, double p, int m) {
        HypothesisSide h;
        h.M = std::move(M);
        h.K = std::move(K);
        h.C_f = C;
        h.C_f_prime = Cp;
        h.p = p;
        h.m = m;
        return h;
    };
    double worst = 0.0;
    for (double p : {kInf, 2.0, 1.0})
        for (int m : {1, 3}) {
            const double C = 0.7, Cp = 1.3;
            const auto r = laplace_to_fourier(lap(two, shift, C, Cp, p, m));
            const double expo = std::isinf(p) ? 2.0 : 2.0 - 1.0 / p;
            for (double s : {0.0, 0.5, 4.0, 300.0}) {
                o.require(r.side.M(s) == 2.0, "constant M stays constant");
                const double expect = shift(s + 0.5) + C * std::pow(2.0, expo) / std::pow(1.0 + s, m) + Cp;
                worst = std::max(worst, std::abs(r.side.K(s) / expect - 1.0));
            }
        }
    const auto K = RateExpr::power_shift(2.0, 1.0, 2.0);
    const auto same = laplace_to_fourier(lap(K, K, 0.0, 0.0, kInf, 1));
    for (double s : {0.0, 1.0, 3.0, 40.0}) worst = std::max(worst, std::abs(same.side.K(s) / K(s + 1.0 / K(s)) - 1.0));
    const auto ps = laplace_to_fourier(lap(shift, shift, 1.0, 0.0, kInf, 1));
    for (double s : {0.0, 1.0, 10.0}) worst = std::max(worst, std::abs(ps.side.M(s) / (2.0 + s + 1.0 / (2.0 + s)) - 1.0));
    o.require(worst < 1e-14, "plug-in examples to rounding");

    const auto eq = theorem_equivalence_check(std_pair(), 1.0, 0.0);
    o.require(eq.pass() && eq.value("c") > 0.0, "equivalence c > 0");
    o.note("plug-in err " + num(worst) + ", c " + num(eq.value("c")));
    return o;
}

Outcome semigroup() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto sys = polynomial_system(1000);
    const auto fit = fit_M_K(sys);
    EnvelopeSpec spec;
    spec.M = fit.M;
    spec.K = fit.K;
    const auto x = gaussian_modes(1000, 5);
    const auto r1 = corollary_check(sys, x, spec, linspace(0.0, 1e3, 1001));
    const auto r2 = corollary_check(sys, x, spec, linspace(0.0, 2e3, 2001));
    const double s1 = r1.value("weighted_sup"), s2 = r2.value("weighted_sup");
    o.require(r1.pass() && r2.pass() && std::isfinite(s2), "weighted sup finite");
    o.require(s2 <= s1 * (1.0 + 1e-12), "no growth from 1e3 to 2e3");

    // One mode at a time: e^{a t} |x| / |omega - lambda|.
    double worst = 0.0;
    for (std::size_t n = 0; n < sys.size(); n += 37) {
        DiagonalSystem one;
        one.xi = {sys.xi[n]};
        one.a = {sys.a[n]};
        for (double t : {0.0, 3.0, 250.0}) {
            const double expect = std::exp(sys.a[n] * t) * std::abs(x[n]) / std::abs(cd(1.0 - sys.a[n], -sys.xi[n]));
            worst = std::max(worst, std::abs(orbit_norm(one, {x[n]}, t) / expect - 1.0));
        }
    }
    o.require(worst < 1e-12, "per-mode closed form to 1e-12");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < 30.0, "runtime < 30 s");
    o.note("sup " + num(s1) + " -> " + num(s2) + ", per-mode err " + num(worst) + ", " + num(secs) + " s");
    return o;
}

Outcome determinism() {
    Outcome o;
    const auto base = fs::temp_directory_path() / "tauber_acceptance";
    fs::remove_all(base);
    std::ostringstream sink;
    for (const char* d : {"a", "b"}) {
        const int code = cli::run({"suite", "--all", "--seed", "7", "--out", (base / d).string()}, sink, sink);
        o.require(code == cli::kExitOk, std::string("suite run ") + d + " passes");
    }
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    int csv = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        if (e.path().extension() != ".csv") continue;
        ++csv;
        o.require(slurp(e.path()) == slurp(base / "b" / e.path().filename()), e.path().filename().string() + " identical");
    }
    o.require(csv > 0, "CSV files emitted");
    o.note(std::to_string(csv) + " CSV files compared");
    fs::remove_all(base);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"roots-of-unity identity", roots_of_unity},
        {"stable extremal evaluators", stable_evaluators},
        {"measure estimates k in {20, 40, 80}", measure_estimates},
        {"extremal function at checkpoints", extremal_checkpoints},
        {"rate algebra", rate_algebra},
        {"mollifier", mollifier},
        {"decomposition", decomposition},
        {"bridge", bridge},
        {"semigroup", semigroup},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s criterion %zu: %s (%s) [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
