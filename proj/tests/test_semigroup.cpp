#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"
#include "tauber/semigroup.hpp"

using namespace tauber;
using cd = std::complex<double>;

namespace {

DiagonalSystem single(cd lambda) {
    DiagonalSystem s;
    s.xi = {lambda.imag()};
    s.a = {lambda.real()};
    return s;
}

std::vector<cd> gaussian_data(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<cd> x(n);
    for (auto& v : x) v = {N(rng), N(rng)};
    return x;
}

// Brute-force orbit norm at 50 digits.
double orbit_hp(const DiagonalSystem& sys, const std::vector<cd>& x, double t) {
    using hp = boost::multiprecision::cpp_bin_float_50;
    hp acc = 0;
    for (std::size_t n = 0; n < sys.size(); ++n) {
        const hp re = hp(sys.omega) - hp(sys.a[n]);
        const hp im = -hp(sys.xi[n]);
        hp shift2 = re * re + im * im;
        hp term = hp(sys.p2(n)) * hp(sys.p1(n));
        term = term * term * (hp(x[n].real()) * hp(x[n].real()) + hp(x[n].imag()) * hp(x[n].imag()));
        term *= exp(2 * hp(sys.a[n]) * hp(t));
        for (int k = 0; k < sys.m; ++k) term /= shift2;
        acc += term;
    }
    return static_cast<double>(sqrt(acc));
}

}  // namespace

TEST_CASE("truncated resolvent: single mode") {
    CHECK(truncated_resolvent_norm(single({-1.0, 0.0}), 0.0) == 1.0);
    CHECK_THROWS_AS(truncated_resolvent_norm(single({-1.0, 2.0}), cd(-1.0, 2.0)), PoleError);
}

TEST_CASE("truncated resolvent: on the imaginary axis at a frequency") {
    DiagonalSystem s;
    s.xi = {0.0, 100.0, 200.0};
    for (double x : s.xi) s.a.push_back(-1.0 / (2.0 + x));
    for (std::size_t n = 0; n < 3; ++n)
        CHECK(truncated_resolvent_norm(s, cd(0.0, s.xi[n])) == doctest::Approx(2.0 + s.xi[n]).epsilon(1e-14));
}

TEST_CASE("truncated resolvent: brute force over modes") {
    auto sys = polynomial_system(200, 1e-2, 1e3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    sys.P1.resize(200);
    sys.P2.resize(200);
    for (std::size_t n = 0; n < 200; ++n) sys.P1[n] = U(rng), sys.P2[n] = U(rng);
    for (int i = 0; i < 1000; ++i) {
        const cd z(-U(rng), 1e3 * U(rng));
        double best = 0.0;
        for (std::size_t n = 0; n < sys.size(); ++n) {
            const double d = std::hypot(z.real() - sys.a[n], z.imag() - sys.xi[n]);
            best = std::max(best, sys.P1[n] * sys.P2[n] / d);
        }
        CHECK(truncated_resolvent_norm(sys, z) == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("system validation and JSON") {
    auto sys = polynomial_system(5);
    CHECK_NOTHROW(sys.validate());
    const auto back = DiagonalSystem::from_json(sys.to_json());
    CHECK(back.xi == sys.xi);
    CHECK(back.a == sys.a);
    CHECK(back.omega == 1.0);
    auto bad = sys;
    bad.a[2] = 0.0;
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = sys;
    bad.P1 = {1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = sys;
    bad.P2 = std::vector<double>(5, 1.5);
    CHECK_THROWS_AS(bad.validate(), SpecError);
    bad = sys;
    std::swap(bad.xi[0], bad.xi[1]);
    CHECK_THROWS_AS(DiagonalSystem::from_json(bad.to_json()), SpecError);
}

TEST_CASE("fit: uniformly damped modes give constant rates") {
    DiagonalSystem sys;
    sys.xi = logspace(1e-2, 1e4, 400);
    sys.a.assign(400, -1.0);
    for (double x : sys.xi) sys.P2.push_back(1.0 / (1.0 + x));
    const auto fit = fit_M_K(sys);
    CHECK(fit.M.kind() == RateExpr::Kind::Const);
    CHECK(fit.M(0.0) == 2.0);
    CHECK(fit.K(0.0) <= 2.0);
    CHECK(fit.K(1e6) <= 2.0);
}

TEST_CASE("fit: polynomial damping gives M within a factor 2 of 2 + s") {
    const auto sys = polynomial_system(1000);
    const auto fit = fit_M_K(sys);
    for (double s : logspace(1e-2, 1e4, 300)) {
        const double r = fit.M(s) / (2.0 + s);
        CHECK(r >= 1.0);
        CHECK(r <= 2.0);
    }
    CHECK(validate_rate(fit.M).valid());
    CHECK(validate_rate(fit.K).valid());
    for (std::size_t n = 0; n < sys.size(); ++n) CHECK_FALSE(omega_contains(fit.M, sys.lambda(n)));
}

TEST_CASE("fit: zero truncation gives K = 2") {
    auto sys = polynomial_system(100);
    sys.P2.assign(100, 0.0);
    const auto fit = fit_M_K(sys);
    CHECK(fit.K.kind() == RateExpr::Kind::Const);
    CHECK(fit.K(0.0) == 2.0);
}

TEST_CASE("fit: resolvent stays below K on sampled points of Omega_M") {
    const auto sys = polynomial_system(1000);
    const auto fit = fit_M_K(sys);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 4000; ++i) {
        const double s = i < 2000 ? 1e4 * U(rng) : sys.xi[static_cast<std::size_t>(U(rng) * 999.0)];
        const double theta = U(rng);
        const cd z(-theta / fit.M(s), s);
        CHECK(truncated_resolvent_norm(sys, z) <= fit.K(s) * (1.0 + 1e-12));
        CHECK(truncated_resolvent_norm(sys, std::conj(z)) <= fit.K(s) * (1.0 + 1e-12));
    }
}

TEST_CASE("orbit norm: closed forms") {
    auto sys = polynomial_system(7);
    sys.m = 0;
    const auto x = gaussian_data(7, 1);
    double nx = 0.0;
    for (auto v : x) nx += std::norm(v);
    CHECK(orbit_norm(sys, x, 0.0) == doctest::Approx(std::sqrt(nx)).epsilon(1e-15));

    const auto one = single({-1.0, 1.0});
    for (double t : {0.0, 0.5, 3.0, 40.0})
        CHECK(orbit_norm(one, {cd(0.6, -0.8)}, t) == doctest::Approx(std::exp(-t) / std::abs(cd(2.0, -1.0))).epsilon(1e-14));

    CHECK(orbit_norm(polynomial_system(10), std::vector<cd>(10), 5.0) == 0.0);
    CHECK_THROWS_AS(orbit_norm(one, {cd(1.0)}, -1.0), DomainError);
}

TEST_CASE("orbit norm: 1000 modes against 50-digit summation") {
    const auto sys = polynomial_system(1000);
    const auto x = gaussian_data(1000, 2);
    for (double t : {0.0, 1.0, 37.0, 1e3, 2e3}) {
        const double ref = orbit_hp(sys, x, t);
        CHECK(std::abs(orbit_norm(sys, x, t) - ref) <= 1e-12 * ref);
    }
}

TEST_CASE("orbit norm: monotone in t, phase blind, smoothing decreases it") {
    auto sys = polynomial_system(300);
    const auto x = gaussian_data(300, 4);
    auto rotated = x;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
    for (auto& v : rotated) v *= std::polar(1.0, U(rng));
    double prev = std::numeric_limits<double>::infinity();
    for (double t : linspace(0.0, 500.0, 101)) {
        const double v = orbit_norm(sys, x, t);
        CHECK(v <= prev);
        prev = v;
        CHECK(orbit_norm(sys, rotated, t) == doctest::Approx(v).epsilon(1e-13));
    }
    // |omega - lambda_n| >= 1 for omega = 1 and a_n < 0.
    auto smoother = sys;
    smoother.m = 2;
    for (double t : {0.0, 10.0, 100.0}) CHECK(orbit_norm(smoother, x, t) <= orbit_norm(sys, x, t));
}

TEST_CASE("corollary: polynomial system, p = inf, horizon doubling") {
    const auto sys = polynomial_system(1000);
    const auto fit = fit_M_K(sys);
    EnvelopeSpec spec;
    spec.M = fit.M;
    spec.K = fit.K;
    const auto x = gaussian_data(1000, 5);
    const auto r1 = corollary_check(sys, x, spec, linspace(0.0, 1e3, 1001));
    const auto r2 = corollary_check(sys, x, spec, linspace(0.0, 2e3, 2001));
    CHECK(r1.pass());
    CHECK(r2.pass());
    CHECK(r1.skipped() == 0);
    CHECK(std::isfinite(r2.value("weighted_sup")));
    CHECK(r2.value("weighted_sup") <= r1.value("weighted_sup") * (1.0 + 1e-12));
}

TEST_CASE("corollary: exponentially stable system") {
    DiagonalSystem sys;
    sys.xi = linspace(0.0, 50.0, 51);
    for (double x : sys.xi) sys.a.push_back(-1.0 - 0.01 * x);
    EnvelopeSpec spec;
    spec.K = RateExpr::power_shift(2.0, 1.0, 1.0);  // w = e^{t/2} - 2
    const auto x = gaussian_data(51, 6);
    const auto rep = corollary_check(sys, x, spec, linspace(0.0, 200.0, 401));
    CHECK(rep.pass());
    // Per-mode bound: |x_n| e^{-t} (e^{t/2}) / |1 - lambda_n| summed in l2.
    double bound = 0.0;
    for (std::size_t n = 0; n < 51; ++n) bound += std::norm(x[n]) / std::norm(1.0 - sys.lambda(n));
    CHECK(rep.value("weighted_sup") <= std::sqrt(bound) * (1.0 + 1e-12));

    spec.p = 2.0;
    const auto lp = corollary_check(sys, x, spec, linspace(0.0, 200.0, 401));
    CHECK(lp.pass());
    CHECK(lp.value("horizon_growth") < 1.0 + 1e-6);

    spec.p = std::numeric_limits<double>::infinity();
    spec.K = RateExpr::constant(2.0);  // constant M_K: w saturates past M_K(1)
    const auto sat = corollary_check(sys, x, spec, linspace(0.0, 10.0, 11));
    CHECK(sat.skipped() > 0);
    CHECK_FALSE(sat.flags().empty());

    const auto zero = corollary_check(sys, std::vector<cd>(51), spec, linspace(0.0, 1.0, 3));
    CHECK(zero.value("weighted_sup") == 0.0);
}

TEST_CASE("wave rate: polynomial and exponential resolvent growth") {
    WaveRateInput lin;
    for (double t : {10.0, 100.0, 1e4}) CHECK(wave_rate(lin, t) == doctest::Approx(1.0 / (t - 2.0)).epsilon(1e-8));
    CHECK(wave_rate(lin, 0.5) == 1.0);

    WaveRateInput ex;
    ex.Mtilde = RateExpr::exp(RateExpr::identity());
    ex.C = 3.0;
    ex.m = 2;
    for (double t : {10.0, 1e3, 1e6}) CHECK(wave_rate(ex, t) == doctest::Approx(3.0 / std::pow(std::log(t), 2)).epsilon(1e-8));
    CHECK_THROWS_AS(wave_rate(ex, -1.0), DomainError);
}

TEST_CASE("wave rate equals the routed envelope for C = 1") {
    WaveRateInput inp;
    inp.Mtilde = RateExpr::power_shift(2.0, 1.0, 0.5);
    inp.c1 = 0.3;
    for (double delta : {1.0, 0.25}) {
        inp.delta = delta;
        const auto spec = wave_envelope_spec(inp);
        for (double t : linspace(1.0, 1e3, 20))
            CHECK(envelope(spec, t) == doctest::Approx(wave_rate(inp, t)).epsilon(1e-8));
    }
    CHECK(check_wave_input(inp).value("c_log") > 0.0);
}
