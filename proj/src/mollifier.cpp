#include "tauber/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tauber/errors.hpp"
#include "tauber/rate_algebra.hpp"

namespace tauber {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRatioSlack = 1e-9;

double width_base(const BumpSpec& spec, int j) {
    if (spec.iterated_log) return iterated_log_sequence(spec.iterated_log->n, spec.iterated_log->eps, j);
    return j * std::pow(std::log(2.0 + j), 1.0 + spec.eps);
}

// Convolves samples v (zero outside the grid) with the normalized box of half-width a,
// integrating the piecewise-linear interpolant exactly.
void box_smooth(std::vector<double>& v, double s0, double h, double a) {
    const std::size_t n = v.size();
    std::vector<double> G(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) G[i] = G[i - 1] + 0.5 * h * (v[i - 1] + v[i]);
    auto antideriv = [&](double x) {
        const double u = (x - s0) / h;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(n - 1)) return G[n - 1];
        const auto i = static_cast<std::size_t>(u);
        const double d = (u - static_cast<double>(i)) * h;
        return G[i] + v[i] * d + (v[i + 1] - v[i]) * d * d / (2.0 * h);
    };
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = s0 + h * static_cast<double>(i);
        out[i] = (antideriv(s + a) - antideriv(s - a)) / (2.0 * a);
    }
    v.swap(out);
}

// Unnormalized convolution of the given boxes on the grid.
std::vector<double> box_chain(const std::vector<double>& a, std::size_t grid_n) {
    const double h = 2.0 / static_cast<double>(grid_n - 1);
    const double s0 = -1.0;
    std::vector<double> v(grid_n, 0.0);
    auto s_at = [&](std::size_t i) { return s0 + h * static_cast<double>(i); };
    const std::size_t mid = grid_n / 2;
    if (a.size() == 1) {
        for (std::size_t i = 0; i < grid_n; ++i) {
            const double s = (i == mid) ? 0.0 : s_at(i);
            if (std::fabs(s) <= a[0] * (1.0 + 1e-15)) v[i] = 1.0 / (2.0 * a[0]);
        }
        return v;
    }
    // Exact trapezoid for the first two boxes.
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double s = (i == mid) ? 0.0 : s_at(i);
        const double overlap = std::min(s + a[1], a[0]) - std::max(s - a[1], -a[0]);
        v[i] = std::max(0.0, overlap) / (4.0 * a[0] * a[1]);
    }
    double support = a[0] + a[1];
    for (std::size_t j = 2; j < a.size(); ++j) {
        box_smooth(v, s0, h, a[j]);
        support += a[j];
        for (std::size_t i = 0; i < grid_n; ++i)
            if (std::fabs(s_at(i)) >= support) v[i] = 0.0;
    }
    return v;
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// sup over the grid of |Δ_H^j v| / H^j with H = 2 r h, treating v as zero off-grid.
double fd_sup(const std::vector<double>& v, int j, std::size_t r, double h) {
    if (j == 0) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::fabs(x));
        return m;
    }
    const double H = 2.0 * static_cast<double>(r) * h;
    const auto n = static_cast<long>(v.size());
    std::vector<double> w(static_cast<std::size_t>(j + 1));
    for (int i = 0; i <= j; ++i) w[static_cast<std::size_t>(i)] = ((i % 2) ? -1.0 : 1.0) * binom(j, i);
    const double scale = std::pow(H, -j);
    double best = 0.0;
    const long rr = static_cast<long>(r);
    const long reach = static_cast<long>(j) * rr;
    for (long c = -reach; c < n + reach; ++c) {
        double acc = 0.0;
        for (int i = 0; i <= j; ++i) {
            const long idx = c + static_cast<long>(j - 2 * i) * rr;
            if (idx >= 0 && idx < n) acc += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(idx)];
        }
        best = std::max(best, std::fabs(acc) * scale);
    }
    return best;
}

std::size_t stencil_ratio(double h, double fd_step) {
    const double r = fd_step / (2.0 * h);
    const auto ri = static_cast<std::size_t>(std::llround(r));
    if (ri < 2) throw ResolutionError("grid step " + format_number(h) + " is too coarse for a difference step of " +
                                      format_number(fd_step));
    return ri;
}

}  // namespace

void BumpSpec::validate() const {
    if (!(eps > 0.0 && eps < 1.0))
        throw SpecError("eps must lie in (0, 1); eps = 0 is the quasi-analytic case, where no nonzero "
                        "compactly supported psi satisfies the derivative bound");
    if (iterated_log && (iterated_log->n < 1 || !(iterated_log->eps > 0.0 && iterated_log->eps < 1.0)))
        throw SpecError("iterated-log mode needs n >= 1 and eps in (0, 1)");
    if (n_boxes < 1) throw SpecError("n_boxes must be at least 1");
    if (grid_n < 5 || grid_n % 2 == 0) throw SpecError("grid_n must be odd and at least 5");
    if (!widths.empty()) {
        if (widths.size() != static_cast<std::size_t>(n_boxes)) throw SpecError("widths must have n_boxes entries");
        for (std::size_t i = 0; i < widths.size(); ++i) {
            if (!(widths[i] > 0.0)) throw SpecError("box widths must be positive");
            if (i > 0 && !(widths[i] < widths[i - 1])) throw SpecError("box widths must be strictly decreasing");
        }
        const double total = std::accumulate(widths.begin(), widths.end(), 0.0);
        if (total > 1.0 + 1e-12) throw SpecError("sum of box widths exceeds 1: support would leave [-1, 1]");
    }
}

std::vector<double> BumpSpec::resolved_widths() const {
    validate();
    if (!widths.empty()) return widths;
    std::vector<double> a(static_cast<std::size_t>(n_boxes));
    for (int j = 1; j <= n_boxes; ++j) a[static_cast<std::size_t>(j - 1)] = 1.0 / width_base(*this, j);
    const double total = std::accumulate(a.begin(), a.end(), 0.0);
    for (double& x : a) x /= total;
    return a;
}

double BumpSpec::log_A(int j) const {
    if (j <= 0) return 0.0;
    return j * std::log(width_base(*this, j));
}

SampledSignal build_psi(const BumpSpec& spec) {
    const auto a = spec.resolved_widths();
    auto v = box_chain(a, spec.grid_n);
    const double peak = v[spec.grid_n / 2];
    for (double& x : v) x /= peak;
    SampledSignal out = SampledSignal::from_real(-1.0, 2.0 / static_cast<double>(spec.grid_n - 1), v);
    out.mollifier = true;
    out.derivative_order = spec.n_boxes - 1;
    return out;
}

std::vector<double> derivative_sups(const SampledSignal& psi, int j_max, double fd_step) {
    const std::size_t r = stencil_ratio(psi.dt, fd_step);
    const auto v = psi.real_parts();
    std::vector<double> out;
    for (int j = 0; j <= j_max; ++j) out.push_back(fd_sup(v, j, r, psi.dt));
    return out;
}

VerificationReport check_derivative_bounds(const SampledSignal& psi, const BumpSpec& spec,
                                           const DerivativeCheckOptions& opt) {
    VerificationReport rep("derivative_bounds");
    const auto a = spec.resolved_widths();
    const auto sups = derivative_sups(psi, opt.j_max, opt.fd_step);

    double log_c1 = -std::numeric_limits<double>::infinity();
    int c1_at = 0;
    for (int j = 0; j <= opt.j_max; ++j) {
        const double lc = (std::log(sups[static_cast<std::size_t>(j)]) - spec.log_A(j)) / (j + 1);
        if (lc > log_c1) {
            log_c1 = lc;
            c1_at = j;
        }
    }
    const double C1 = std::exp(log_c1);
    rep.observe("C1", C1, c1_at, std::isfinite(C1));

    // Box bound: differentiating boxes 1..j costs total variation 1/a_i each; the remaining
    // chain is bounded by its centre value, relative to the normalizing centre value h(0).
    const double h0 = box_chain(a, spec.grid_n)[spec.grid_n / 2];
    double worst_box = 0.0;
    int worst_box_at = 0;
    double log_box = 0.0;
    for (int j = 0; j <= opt.j_max; ++j) {
        if (j >= static_cast<int>(a.size())) {
            rep.count_skipped();
            continue;
        }
        if (j > 0) log_box -= std::log(a[static_cast<std::size_t>(j - 1)]);
        const std::vector<double> rest(a.begin() + j, a.end());
        const double tail0 = box_chain(rest, spec.grid_n)[spec.grid_n / 2];
        const double sup = sups[static_cast<std::size_t>(j)];
        const double bound = std::exp(log_box) * tail0 / h0;
        const double ratio = sup / bound;
        rep.add_row({"box_bound", static_cast<double>(j), sup, bound, bound - sup, ratio <= 1.0 + kRatioSlack});
        if (j > 0 && ratio > worst_box) {
            worst_box = ratio;
            worst_box_at = j;
        }
    }
    rep.observe("box_bound", worst_box, worst_box_at, worst_box <= 1.0 + kRatioSlack);

    for (int j = 0; j <= opt.j_max; ++j) {
        const double bound = std::exp((j + 1) * log_c1 + spec.log_A(j));
        rep.add_row({"dc_bound", static_cast<double>(j), sups[static_cast<std::size_t>(j)], bound,
                     bound - sups[static_cast<std::size_t>(j)], true});
    }

    // ψ^k against C1^k (k C1)^j A_j.
    const auto v = psi.real_parts();
    const std::size_t r = stencil_ratio(psi.dt, opt.fd_step);
    double worst_pow = 0.0;
    double worst_pow_at = 0.0;
    for (int k = 1; k <= opt.power_k_max; ++k) {
        std::vector<double> vk(v.size());
        std::transform(v.begin(), v.end(), vk.begin(), [k](double x) { return std::pow(x, k); });
        for (int j = 0; j <= opt.power_j_max; ++j) {
            const double sup = fd_sup(vk, j, r, psi.dt);
            const double log_bound = k * log_c1 + j * (std::log(static_cast<double>(k)) + log_c1) + spec.log_A(j);
            const double ratio = sup / std::exp(log_bound);
            rep.add_row({"power_bound_k" + std::to_string(k), static_cast<double>(j), sup, std::exp(log_bound),
                         std::exp(log_bound) - sup, ratio <= 1.0 + kRatioSlack});
            if (ratio > worst_pow) {
                worst_pow = ratio;
                worst_pow_at = 10.0 * k + j;
            }
        }
    }
    rep.observe("power_bound", worst_pow, worst_pow_at, worst_pow <= 1.0 + kRatioSlack);
    return rep;
}

SampledSignal phi_from_psi(const SampledSignal& psi, double t0, double dt, std::size_t n) {
    const std::size_t N = psi.size();
    std::vector<cplx> w(N);
    for (std::size_t i = 0; i < N; ++i) w[i] = psi.values[i] * ((i == 0 || i + 1 == N) ? 0.5 : 1.0);
    SampledSignal out;
    out.t0 = t0;
    out.dt = dt;
    out.values.resize(n);
    constexpr std::size_t kReanchor = 256;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + dt * static_cast<double>(k);
        const cplx step = std::polar(1.0, psi.dt * t);
        cplx acc{};
        cplx rot{};
        for (std::size_t i = 0; i < N; ++i) {
            if (i % kReanchor == 0) rot = std::polar(1.0, psi.t(i) * t);
            acc += w[i] * rot;
            rot *= step;
        }
        out.values[k] = acc * (psi.dt / (2.0 * kPi));
    }
    return out;
}

SampledSignal scale(const SampledSignal& phi, double R) {
    if (!(R > 0.0)) throw SpecError("scale factor R must be positive");
    SampledSignal out = phi;
    out.t0 = phi.t0 / R;
    out.dt = phi.dt / R;
    for (auto& v : out.values) v *= R;
    return out;
}

SampledSignal scale(const SampledSignal& phi, double R, double t0, double dt, std::size_t n,
                    bool preserve_mass) {
    if (!(R > 0.0)) throw SpecError("scale factor R must be positive");
    SampledSignal out = SampledSignal::from_function(t0, dt, n, [&](double t) { return R * phi.at_cubic(R * t); });
    if (preserve_mass) {
        const cplx target = phi.integral();
        const cplx got = out.integral();
        if (std::abs(got) > 0.0) {
            const cplx f = target / got;
            for (auto& v : out.values) v *= f;
        }
    }
    return out;
}

}  // namespace tauber
