#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"
#include "tauber/rate_algebra.hpp"

using namespace tauber;

namespace {

const RateExpr kTwo = RateExpr::constant(2.0);
const RateExpr kTwoPlusS = RateExpr::power_shift(2.0, 1.0, 1.0);

EnvelopeSpec spec_of(RateExpr M, RateExpr K, int m = 1, double c1 = 1.0) {
    EnvelopeSpec s;
    s.M = std::move(M);
    s.K = std::move(K);
    s.m = m;
    s.c1 = c1;
    return s;
}

// Largest s on a dense uniform grid with f(s) <= t, refined by linear interpolation
// between the bracketing samples. Independent of the bisection code path.
double dense_inverse(const std::function<double(double)>& f, double t, double s_hi, double h) {
    double prev_s = 0.0, prev_v = f(0.0);
    for (double s = h; s <= s_hi; s += h) {
        const double v = f(s);
        if (v > t) return prev_s + (t - prev_v) / (v - prev_v) * (s - prev_s);
        prev_s = s;
        prev_v = v;
    }
    return s_hi;
}

}  // namespace

TEST_CASE("eval closed forms") {
    CHECK(kTwoPlusS.eval(5.0).value == 7.0);
    CHECK(kTwo.eval(1e6).value == 2.0);
    const auto e = RateExpr::exp(RateExpr::power_shift(0.0, 1.0, 0.5));
    CHECK(e(4.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));
    CHECK_FALSE(e.eval(4.0).saturated);
}

TEST_CASE("eval saturates instead of returning infinity") {
    const auto ee = RateExpr::exp(RateExpr::exp(RateExpr::identity()));
    const auto r = ee.eval(10.0);
    CHECK(r.saturated);
    CHECK(std::isfinite(r.value));
    CHECK(ee.log_eval(10.0).value == doctest::Approx(std::exp(10.0)));
    CHECK_FALSE(ee.log_eval(10.0).saturated);
    CHECK(ee.log_eval(800.0).saturated);
}

TEST_CASE("log_eval agrees with log of eval where both are finite") {
    const auto f = RateExpr::sum({RateExpr::product({kTwoPlusS, RateExpr::log_shift(2.0, 1.0)}),
                                  RateExpr::scale(3.0, RateExpr::power(kTwoPlusS, 1.5)),
                                  RateExpr::max({kTwo, RateExpr::exp(RateExpr::log_shift(0.0, 1.0))})});
    for (double s : {0.0, 0.3, 2.0, 17.0, 1e3}) {
        CHECK(f.log_eval(s).value == doctest::Approx(std::log(f(s))).epsilon(1e-13));
    }
}

TEST_CASE("json round trip") {
    const auto f = RateExpr::compose(RateExpr::scale(2.0, RateExpr::exp(RateExpr::identity())),
                                     RateExpr::sum({kTwoPlusS, RateExpr::power(kTwo, -1.0)}));
    const auto g = RateExpr::from_json(f.to_json());
    CHECK(g.to_json() == f.to_json());
    for (double s : {0.0, 1.0, 3.5}) CHECK(g(s) == f(s));
    const auto h = RateExpr::parse(R"({"kind":"power_shift","c0":2,"a":1,"alpha":1})");
    CHECK(h(5.0) == 7.0);
    CHECK_THROWS_AS(RateExpr::parse(R"({"kind":"nope"})"), SpecError);
    CHECK_THROWS_AS(RateExpr::parse("{"), SpecError);
    const auto pw = RateExpr::piecewise_linear({0.0, 1.0, 2.0}, {2.0, 3.0, 5.0});
    CHECK(RateExpr::from_json(pw.to_json())(1.5) == 4.0);
}

TEST_CASE("validate_rate") {
    CHECK(validate_rate(kTwoPlusS).valid());
    CHECK(validate_rate(RateExpr::log_shift(2.0, 1.0)).valid());
    CHECK_FALSE(validate_rate(RateExpr::power_shift(1.0, 1.0, 1.0)).at_least_two);
    const auto dec = RateExpr::piecewise_linear({0.0, 1.0, 2.0}, {3.0, 2.5, 4.0});
    const auto v = validate_rate(dec);
    CHECK_FALSE(v.sampled_monotone);
    CHECK(v.first_decrease_at > 0.0);
    CHECK_FALSE(dec.structurally_nondecreasing());
    CHECK(kTwoPlusS.structurally_nondecreasing());
}

TEST_CASE("right_inverse examples") {
    const auto sq = RateExpr::power_shift(2.0, 1.0, 2.0);
    CHECK(right_inverse(sq, 6.0).value == doctest::Approx(2.0).epsilon(1e-10));
    const auto c = right_inverse(kTwo, 2.0);
    CHECK(c.saturated);
    CHECK(c.value == kDefaultDomainCap);
    CHECK_THROWS_AS(right_inverse(sq, 1.0), DomainError);

    std::vector<double> knots, vals;
    for (double s : linspace(0.0, 20.0, 41)) {
        knots.push_back(s);
        vals.push_back(2.0 + s);
    }
    const auto sampled = RateExpr::piecewise_linear(knots, vals);
    const double tol = 1e-10;
    CHECK(std::fabs(right_inverse(sampled, 7.3, tol).value - 5.3) < 2 * tol * 5.3);
}

TEST_CASE("right_inverse selects the right end of a plateau") {
    const auto plateau = RateExpr::piecewise_linear({0.0, 1.0, 2.0, 3.0}, {2.0, 3.0, 3.0, 4.0});
    CHECK(right_inverse(plateau, 3.0).value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("w_of examples") {
    const auto sq = RateExpr::power_shift(2.0, 1.0, 2.0);
    CHECK(w_of(sq, 1.0).value == 1.0);
    CHECK(w_of(sq, 6.0).value == doctest::Approx(2.0).epsilon(1e-10));
    const auto lg = RateExpr::log_shift(2.0, 1.0);
    CHECK(w_of(lg, 4.0).value == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-10));
}

TEST_CASE("w_of is non-decreasing and inverts eval") {
    const auto f = RateExpr::product({kTwoPlusS, RateExpr::log_shift(1.0, 1.0)});
    double prev = 0.0;
    for (double t : logspace(0.1, 1e6, 400)) {
        const double w = w_of(f, t).value;
        CHECK(w >= prev);
        CHECK(w >= 1.0);
        if (t >= f(1.0)) CHECK(f(w) >= t - 1e-10 * std::max(1.0, t));
        prev = w;
    }
}

TEST_CASE("round trip w_of(eval) on strictly increasing closed forms") {
    const std::vector<RateExpr> fs{
        kTwoPlusS,
        RateExpr::power_shift(2.0, 3.0, 0.5),
        RateExpr::log_shift(2.0, 1.0),
        RateExpr::exp(RateExpr::power_shift(std::log(2.0), 1.0, 1.0)),
        RateExpr::product({kTwoPlusS, RateExpr::log_shift(1.0, 1.0)}),
    };
    for (const auto& f : fs) {
        for (double s : logspace(1.0, 300.0, 50)) {
            const double back = w_of(f, f(s)).value;
            CHECK(std::fabs(back - s) / s < 1e-8);
        }
    }
}

TEST_CASE("mk_rate examples") {
    const auto a = spec_of(kTwo, kTwoPlusS);
    CHECK(mk_rate(a, std::exp(1.0) - 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    const auto b = spec_of(kTwo, kTwo);
    CHECK(mk_rate(b, 123.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    auto g = b;
    g.variant = MkVariant::General;
    // (2 + 0) * 2 * 2 = 8.
    CHECK(mk_rate(g, 0.0) == doctest::Approx(2.0 * std::log(8.0)).epsilon(1e-15));
}

TEST_CASE("general variant dominates standard") {
    for (const auto& [M, K] : std::vector<std::pair<RateExpr, RateExpr>>{
             {kTwo, kTwoPlusS}, {kTwoPlusS, kTwoPlusS}, {kTwoPlusS, kTwo}}) {
        auto st = spec_of(M, K);
        auto ge = st;
        ge.variant = MkVariant::General;
        for (double s : logspace(1e-3, 1e5, 200)) CHECK(mk_rate(ge, s) >= mk_rate(st, s));
    }
}

TEST_CASE("envelope examples") {
    const auto a = spec_of(kTwo, kTwoPlusS);
    CHECK(envelope(a, 10.0) == doctest::Approx(1.0 / (std::exp(5.0) - 2.0)).epsilon(1e-9));
    CHECK(envelope(a, 0.0) == 1.0);
    CHECK(envelope(spec_of(kTwoPlusS, kTwoPlusS, 2), 0.0) == 1.0);

    const auto b = spec_of(kTwoPlusS, kTwoPlusS, 2);
    const auto mk = [](double s) { return (2.0 + s) * std::log(2.0 + s); };
    const double s_star = dense_inverse(mk, 100.0, 1e3, 1e-3);
    const double expect = std::pow(s_star, -2.0);
    CHECK(std::fabs(envelope(b, 100.0) - expect) / expect < 1e-6);
}

TEST_CASE("envelope is non-increasing and invariant under equal trees") {
    const auto a = spec_of(kTwo, kTwoPlusS);
    const auto b = spec_of(RateExpr::sum({RateExpr::constant(1.0), RateExpr::constant(1.0)}),
                           RateExpr::scale(2.0, RateExpr::power_shift(1.0, 0.5, 1.0)));
    double prev = 2.0;
    for (double t : linspace(0.0, 200.0, 401)) {
        const double e = envelope(a, t);
        CHECK(e <= prev);
        CHECK(envelope(b, t) == e);
        prev = e;
    }
}

TEST_CASE("omega_contains examples") {
    CHECK(omega_contains(kTwoPlusS, {-0.1, 5.0}));
    CHECK_FALSE(omega_contains(kTwoPlusS, {-0.2, 5.0}));
    CHECK_FALSE(omega_contains(kTwoPlusS, {0.1, 5.0}));
    CHECK(omega_contains(kTwoPlusS, {-0.1, -5.0}));
}

TEST_CASE("check_hypotheses examples") {
    const auto a = check_hypotheses(spec_of(kTwo, kTwoPlusS), 1e4, 257);
    CHECK(a.observation("cond_i_margin").pass);
    CHECK(a.value("cond_ii_eps") > 0.5);
    CHECK(a.pass());

    const auto b = check_hypotheses(spec_of(kTwoPlusS, kTwo), 1e3, 129);
    CHECK_FALSE(b.observation("cond_i_margin").pass);
    for (const auto& row : b.rows())
        if (row.name == "cond_i" && row.grid_point > 2.0) CHECK_FALSE(row.pass);

    const auto c = check_hypotheses(spec_of(kTwo, RateExpr::exp(RateExpr::exp(RateExpr::identity()))), 1e3, 129);
    CHECK(c.value("cond_ii_eps") <= 0.0);
    CHECK_FALSE(c.pass());
}

TEST_CASE("check_hypotheses is stable under grid doubling") {
    const auto s = spec_of(kTwo, kTwoPlusS);
    const double e1 = check_hypotheses(s, 1e4, 257).value("cond_ii_eps");
    const double e2 = check_hypotheses(s, 1e4, 513).value("cond_ii_eps");
    CHECK(std::fabs(e1 - e2) / e1 < 0.01);
}

TEST_CASE("check_K_aux examples") {
    const auto a = check_K_aux(spec_of(kTwo, kTwoPlusS), 100.0, 257);
    CHECK(a.value("delta_hat") >= 1.0);
    // Closed form: K(w(t)) = e^{t/2}, so delta_hat = min t / (2 log t) = e / 2 at t = e.
    CHECK(a.value("delta_hat") == doctest::Approx(std::exp(1.0) / 2.0).epsilon(1e-3));

    const auto b = check_K_aux(spec_of(kTwo, kTwo), 100.0, 65);
    CHECK(b.pass());
    CHECK(b.has_flag("degenerate"));

    const auto c = check_K_aux(spec_of(kTwoPlusS, kTwoPlusS), 1e4, 257);
    CHECK(c.value("delta_hat") > 0.0);
    const auto c2 = check_K_aux(spec_of(kTwoPlusS, kTwoPlusS), 1e4, 513);
    CHECK(std::fabs(c.value("delta_hat") - c2.value("delta_hat")) / c.value("delta_hat") < 0.01);
}

TEST_CASE("check_submultiplicative examples") {
    const auto a = check_submultiplicative(kTwoPlusS, kTwoPlusS, 0.0);
    CHECK(a.pass());
    CHECK(a.value("worst_ratio") <= 1.0);

    const auto ex = RateExpr::exp(RateExpr::identity());
    const auto b = check_submultiplicative(ex, ex, 0.0);
    CHECK(b.pass());
    CHECK(std::fabs(b.value("worst_log_ratio")) < 1e-12);

    const auto sq = RateExpr::exp(RateExpr::power_shift(0.0, 1.0, 2.0));
    const auto c = check_submultiplicative(sq, sq, 0.0);
    CHECK_FALSE(c.pass());

    // gamma0 for 2 + s with s1 = 1: sup (2 + s + 1) / (2 + s) at s = s0 = 0.
    CHECK(a.value("gamma0") == doctest::Approx(1.5));
}

TEST_CASE("iterated_log_sequence examples") {
    CHECK(iterated_log_sequence(1, 0.5, 0) == 0.0);
    CHECK(iterated_log_sequence(1, 0.5, 1) ==
          doctest::Approx(std::log(3.0) * std::pow(std::log(std::log(4.0)), 1.5)).epsilon(1e-15));
    for (int n = 1; n <= 3; ++n) {
        double prev = 0.0;
        for (long j = 1; j <= 10000; ++j) {
            const double a = iterated_log_sequence(n, 0.5, j);
            CHECK(a > 0.0);
            CHECK(a >= prev);
            prev = a;
        }
    }
}
