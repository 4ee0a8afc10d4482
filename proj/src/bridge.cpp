#include "tauber/bridge.hpp"

#include <algorithm>
#include <cmath>

#include "tauber/decomposition.hpp"
#include "tauber/errors.hpp"
#include "tauber/grid.hpp"

namespace tauber {

namespace {

constexpr double kWideCap = 1e300;
// Both sides come from bisections, so equality cases need a little room.
constexpr double kRatioSlack = 1e-8;

nlohmann::json number_or_null(double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); }

double number_or_nan(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.at(key).get<double>();
}

void check_constants(const HypothesisSide& h) {
    if (std::isnan(h.C_f) || std::isnan(h.C_f_prime))
        throw SpecError("laplace_to_fourier: C_f and C'_f must be supplied or computed from a signal");
    if (!(h.C_f >= 0.0) || !(h.C_f_prime >= 0.0) || !std::isfinite(h.C_f) || !std::isfinite(h.C_f_prime))
        throw SpecError("laplace_to_fourier: C_f and C'_f must be finite and nonnegative");
}

}  // namespace

nlohmann::json HypothesisSide::to_json() const {
    nlohmann::json j;
    j["side"] = side == Side::Laplace ? "laplace" : "fourier";
    j["M"] = M.to_json();
    j["K"] = K.to_json();
    if (std::isinf(p))
        j["p"] = "inf";
    else
        j["p"] = p;
    j["m"] = m;
    j["C_f"] = number_or_null(C_f);
    j["C_f_prime"] = number_or_null(C_f_prime);
    return j;
}

HypothesisSide HypothesisSide::from_json(const nlohmann::json& j) {
    HypothesisSide h;
    const auto side = j.value("side", std::string("laplace"));
    if (side == "laplace")
        h.side = Side::Laplace;
    else if (side == "fourier")
        h.side = Side::Fourier;
    else
        throw SpecError("side must be \"laplace\" or \"fourier\"");
    if (j.contains("M")) h.M = RateExpr::from_json(j.at("M"));
    if (j.contains("K")) h.K = RateExpr::from_json(j.at("K"));
    if (j.contains("p")) {
        const auto& p = j.at("p");
        if (p.is_string() && p.get<std::string>() != "inf") throw SpecError("p must be a number or \"inf\"");
        h.p = p.is_string() ? std::numeric_limits<double>::infinity() : p.get<double>();
    }
    h.m = j.value("m", 1);
    h.C_f = number_or_nan(j, "C_f");
    h.C_f_prime = number_or_nan(j, "C_f_prime");
    if (h.m < 1) throw SpecError("derivative order m must be at least 1");
    if (!(h.p >= 1.0)) throw SpecError("exponent p must lie in [1, inf]");
    return h;
}

void constants_from_signal(HypothesisSide& h, const SampledSignal& f, const SampledSignal* fm) {
    if (f.size() < static_cast<std::size_t>(h.m) + 2) throw ResolutionError("constants_from_signal: signal too short");
    const SampledSignal dm = fm ? *fm : derivative(f, h.m);
    h.C_f = dm.lp_norm(h.p);
    double jet = 0.0;
    for (int j = 0; j < h.m; ++j) {
        const SampledSignal dj = j == 0 ? f : derivative(f, j);
        jet += std::abs(dj.values.front());
    }
    h.C_f_prime = jet;
}

HypothesisSide fourier_to_laplace(const HypothesisSide& h, double eps) {
    if (h.side != Side::Fourier) throw SpecError("fourier_to_laplace needs a Fourier-side hypothesis");
    if (!(eps > 0.0 && eps < 1.0)) throw SpecError("fourier_to_laplace: eps must lie in (0, 1)");
    HypothesisSide out = h;
    out.side = Side::Laplace;
    out.M = RateExpr::scale(1.0 / (1.0 - eps), h.M);
    out.K = RateExpr::scale(1.0 / eps, h.K);
    return out;
}

ConversionResult laplace_to_fourier(const HypothesisSide& h, double s_max, bool majorant) {
    if (h.side != Side::Laplace) throw SpecError("laplace_to_fourier needs a Laplace-side hypothesis");
    check_constants(h);
    const RateExpr shift = RateExpr::sum({RateExpr::identity(), RateExpr::power(h.M, -1.0)});
    const RateExpr M_shifted = RateExpr::compose(h.M, shift);

    std::vector<RateExpr> k_terms{RateExpr::compose(h.K, shift)};
    if (h.C_f > 0.0) {
        const double expo = std::isinf(h.p) ? 2.0 : 2.0 - 1.0 / h.p;
        const RateExpr grow = RateExpr::power(M_shifted, expo);
        const RateExpr decay = RateExpr::power(RateExpr::power_shift(1.0, 1.0, 1.0), -static_cast<double>(h.m));
        k_terms.push_back(RateExpr::scale(h.C_f, majorant ? grow : RateExpr::product({grow, decay})));
    }
    if (h.C_f_prime > 0.0) k_terms.push_back(RateExpr::constant(h.C_f_prime));

    ConversionResult r;
    r.side = h;
    r.side.side = Side::Fourier;
    r.side.M = M_shifted;
    r.side.K = k_terms.size() == 1 ? k_terms.front() : RateExpr::sum(k_terms);
    r.M_validity = validate_rate(r.side.M, s_max);
    r.K_validity = validate_rate(r.side.K, s_max);
    if (!r.M_validity.valid())
        r.flags.push_back("M_2 fails validation on [0, " + format_number(s_max) + "]");
    if (!r.K_validity.valid())
        r.flags.push_back("K_2 fails validation on [0, " + format_number(s_max) + "]");
    return r;
}

std::vector<EpsRow> eps_tradeoff_table(const HypothesisSide& h, const std::vector<double>& s_points,
                                       std::vector<double> eps_list) {
    if (eps_list.empty())
        for (int i = 1; i <= 9; ++i) eps_list.push_back(i / 10.0);
    std::vector<EpsRow> rows;
    for (double eps : eps_list) {
        const auto l = fourier_to_laplace(h, eps);
        for (double s : s_points) rows.push_back({eps, s, l.M(s), l.K(s)});
    }
    return rows;
}

VerificationReport theorem_equivalence_check(const EnvelopeSpec& spec, double C_f, double C_f_prime,
                                             const EquivalenceWindow& window, double c_fixed) {
    spec.validate();
    HypothesisSide h;
    h.M = spec.M;
    h.K = spec.K;
    h.p = spec.p;
    h.m = spec.m;
    h.C_f = C_f;
    h.C_f_prime = C_f_prime;
    const auto conv = laplace_to_fourier(h, 2.0 * window.s_hi, true);
    const RateExpr& M2 = conv.side.M;
    const RateExpr& K2 = conv.side.K;

    VerificationReport rep("theorem_equivalence");
    for (const auto& f : conv.flags) rep.flag(f);

    const auto s_grid = logspace(window.s_lo, window.s_hi, static_cast<std::size_t>(window.grid_n));
    std::vector<double> lhs(s_grid.size()), rhs(s_grid.size());
    double c = std::numeric_limits<double>::infinity();
    double c_at = s_grid.front();
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        const double s = s_grid[i];
        lhs[i] = M2(s) * std::log(K2(s));
        rhs[i] = spec.M(2.0 * s) * std::log(spec.K(2.0 * s));
        if (rhs[i] / lhs[i] < c) c = rhs[i] / lhs[i], c_at = s;
    }
    rep.observe("c", c, c_at, std::isfinite(c) && c > 0.0);
    const double c_used = c_fixed > 0.0 ? c_fixed : c;
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        const double margin = rhs[i] - c_used * lhs[i];
        rep.add_row({"first_inequality", s_grid[i], c_used * lhs[i], rhs[i], margin, margin >= 0.0});
    }

    const RateExpr mk = spec.mk();
    const RateExpr mk2 = RateExpr::product({M2, RateExpr::log(K2)});
    const double t_hi = mk2(window.s_hi);
    double worst = 0.0, worst_at = 0.0;
    for (double t : linspace(0.0, t_hi, static_cast<std::size_t>(window.t_grid_n))) {
        const auto a = w_of(mk, c_used * t, window.tol, kWideCap);
        const auto b = w_of(mk2, t, window.tol, kWideCap);
        if (a.saturated || b.saturated) {
            rep.count_skipped();
            continue;
        }
        const double ratio = a.value / (2.0 * b.value);
        rep.add_row({"w_inequality", t, a.value, 2.0 * b.value, 2.0 * b.value - a.value, ratio <= 1.0 + kRatioSlack});
        if (ratio > worst) worst = ratio, worst_at = t;
    }
    rep.observe("w_ratio", worst, worst_at, worst <= 1.0 + kRatioSlack);
    return rep;
}

}  // namespace tauber
