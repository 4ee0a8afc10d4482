#include "tauber/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>

#include <CLI11.hpp>

#include "tauber/bridge.hpp"
#include "tauber/decomposition.hpp"
#include "tauber/errors.hpp"
#include "tauber/extremal.hpp"
#include "tauber/grid.hpp"
#include "tauber/mollifier.hpp"
#include "tauber/rate_algebra.hpp"
#include "tauber/semigroup.hpp"

#ifndef TAUBERLAB_VERSION
#define TAUBERLAB_VERSION "0.0.0"
#endif

namespace tauber::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_p(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double p = std::stod(text, &used);
        if (used == text.size()) return p;
    } catch (const std::exception&) {
    }
    throw SpecError("p must be a number or \"inf\", got '" + text + "'");
}

// Output directory, collected reports and the summary file.
class Session {
public:
    Session(fs::path dir, std::string subcommand) : dir_(std::move(dir)), subcommand_(std::move(subcommand)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        const auto probe = dir_ / ".tauberlab_probe";
        std::ofstream test(probe);
        if (ec || !test) throw SpecError("output directory " + dir_.string() + " is not writable");
        test.close();
        fs::remove(probe, ec);
    }

    json& config() { return config_; }

    void report(const VerificationReport& rep, const std::string& file) {
        {
            auto os = open(file);
            rep.write_csv(os);
        }
        auto j = rep.to_json();
        j["file"] = file;
        reports_.push_back(j);
        pass_ = pass_ && rep.pass();
        lines_.push_back(std::string(rep.pass() ? "PASS " : "FAIL ") + rep.name() + " (" + file + ")");
    }

    void table(const std::string& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
        auto os = open(file);
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
            os << '\n';
        }
    }

    void signal(const std::string& file, const SampledSignal& s) {
        auto os = open(file);
        write_csv(os, s);
    }

    void document(const std::string& file, const json& j) {
        auto os = open(file);
        os << j.dump(2) << '\n';
    }

    int finish(std::ostream& out) {
        json summary;
        summary["tool"] = "tauberlab";
        summary["version"] = version();
        summary["subcommand"] = subcommand_;
        summary["config"] = config_;
        summary["reports"] = reports_;
        summary["files"] = files_;
        summary["pass"] = pass_;
        document("summary.json", summary);
        for (const auto& l : lines_) out << l << '\n';
        out << (pass_ ? "all checks passed" : "some checks failed") << '\n';
        return pass_ ? kExitOk : kExitCheckFailed;
    }

private:
    std::ofstream open(const std::string& file) {
        std::ofstream os(dir_ / file, std::ios::binary);
        if (!os) throw SpecError("cannot write " + (dir_ / file).string());
        if (file != "summary.json") files_.push_back(file);
        return os;
    }

    fs::path dir_;
    std::string subcommand_;
    json config_ = json::object();
    json reports_ = json::array();
    std::vector<std::string> files_;
    std::vector<std::string> lines_;
    bool pass_ = true;
};

struct RateOpts {
    std::string M = R"({"kind":"const","c":2})";
    std::string K = R"({"kind":"power_shift","c0":2,"a":1,"alpha":1})";
    int m = 1;
    std::string p = "inf";
    double c1 = 1.0;
    std::string variant = "standard";

    void add(CLI::App* app) {
        app->add_option("--M", M, "rate M as JSON or @file");
        app->add_option("--K", K, "rate K as JSON or @file");
        app->add_option("--m", m, "derivative order")->check(CLI::PositiveNumber);
        app->add_option("--p", p, "exponent in (1, inf] or 'inf'");
        app->add_option("--c1", c1, "envelope scaling constant");
        app->add_option("--variant", variant, "M_K variant")->check(CLI::IsMember({"standard", "general"}));
    }

    EnvelopeSpec spec() const {
        EnvelopeSpec s;
        s.M = RateExpr::parse(M);
        s.K = RateExpr::parse(K);
        s.m = m;
        s.p = parse_p(p);
        s.c1 = c1;
        s.variant = variant == "general" ? MkVariant::General : MkVariant::Standard;
        s.validate();
        return s;
    }

    json echo() const { return envelope_to_json(spec()); }
};

struct RatesOpts {
    RateOpts rate;
    bool envelope = false;
    bool hypotheses = false;
    double t_max = 100.0;
    int grid = 201;
    double s_max = 1e4;
    double tol = kDefaultInverseTol;
};

struct MollifierOpts {
    int boxes = 64;
    double eps = 0.5;
    std::size_t grid_n = (std::size_t{1} << 14) + 1;
    int j_max = 6;
    double phi_t_max = 50.0;
    std::size_t phi_n = 1001;
};

struct DecomposeOpts {
    std::string signal;
    std::string demo = "exp";
    double t_max = 500.0;
    double dt = 0.05;
    double R = 1.0;
    int m = 1;
    bool lemma21 = false;
};

struct ExtremalOpts {
    RateOpts rate;
    int k = 40;
    double delta = 0.0;  // 0: default_delta
    double beta = 2.0;
    bool verify_lemma42 = false;
    int build = 0;
    double eps0 = 1e-3;
    int roots = 0;  // k_max of the roots-of-unity check, 0 = off
    int per_k = 100;
    unsigned long long seed = 7;
    Lemma42Grid grid;
};

struct BridgeOpts {
    RateOpts rate;
    std::string side = "laplace";
    double C_f = kNaN;
    double C_f_prime = kNaN;
    std::vector<double> eps;
    std::vector<double> s_points{0.0, 1.0, 10.0, 100.0};
    bool equivalence = false;
    double s_hi = 1e3;
};

struct SemigroupOpts {
    RateOpts rate;  // only m, p, c1 are used; M and K are fitted
    std::string system;
    std::size_t modes = 1000;
    double xi_min = 1e-2;
    double xi_max = 1e4;
    double t_max = 1e3;
    int grid = 1001;
    unsigned long long seed = 7;
    FitWindow fit;
    bool wave = false;
    std::string mtilde = R"({"kind":"power_shift","c0":2,"a":1,"alpha":1})";
    double delta = 1.0;
    double C = 1.0;
};

void do_rates(Session& s, const RatesOpts& o, const std::string& pre) {
    const auto spec = o.rate.spec();
    s.config()[pre + "rates"] = {{"spec", o.rate.echo()}, {"t_max", o.t_max}, {"grid", o.grid},
                                 {"s_max", o.s_max},      {"tol", o.tol}};
    const bool both = !o.envelope && !o.hypotheses;
    if (o.envelope || both) {
        const RateExpr mk = spec.mk();
        std::vector<std::vector<double>> rows;
        for (double t : linspace(0.0, o.t_max, static_cast<std::size_t>(o.grid)))
            rows.push_back({t, w_of(mk, spec.c1 * t, o.tol).value, envelope(spec, t, o.tol)});
        s.table(pre + "envelope.csv", {"t", "w", "envelope"}, rows);
    }
    if (o.hypotheses || both) {
        s.report(check_hypotheses(spec, o.s_max, o.grid), pre + "hypotheses.csv");
        s.report(check_K_aux(spec, o.t_max, o.grid, o.tol), pre + "k_aux.csv");
    }
}

void do_mollifier(Session& s, const MollifierOpts& o, const std::string& pre) {
    BumpSpec b;
    b.n_boxes = o.boxes;
    b.eps = o.eps;
    b.grid_n = o.grid_n;
    s.config()[pre + "mollifier"] = {{"boxes", o.boxes}, {"eps", o.eps},           {"grid_n", o.grid_n},
                                     {"j_max", o.j_max}, {"phi_t_max", o.phi_t_max}, {"phi_n", o.phi_n}};
    const auto psi = build_psi(b);
    s.signal(pre + "psi.csv", psi);
    s.signal(pre + "phi.csv", phi_from_psi(psi, -o.phi_t_max, 2.0 * o.phi_t_max / static_cast<double>(o.phi_n - 1), o.phi_n));
    DerivativeCheckOptions opt;
    opt.j_max = o.j_max;
    s.report(check_derivative_bounds(psi, b, opt), pre + "derivative_bounds.csv");
}

SampledSignal demo_signal(const std::string& name, double t_max, double dt) {
    const auto n = static_cast<std::size_t>(std::llround(t_max / dt)) + 1;
    if (name == "exp") return SampledSignal::from_function(0.0, dt, n, [](double t) { return cplx(std::exp(-t)); });
    if (name == "oscillating")
        return SampledSignal::from_function(0.0, dt, n, [](double t) { return cplx(std::sin(3.0 * t) / (1.0 + t * t)); });
    if (name == "bump")
        return SampledSignal::from_function(0.0, dt, n, [](double t) { return cplx(t * t * std::exp(-t)); });
    throw SpecError("unknown demo signal '" + name + "' (exp, oscillating, bump)");
}

void do_decompose(Session& s, const DecomposeOpts& o, const std::string& pre) {
    SampledSignal f;
    if (!o.signal.empty()) {
        std::ifstream in(o.signal);
        if (!in) throw SpecError("cannot open signal file " + o.signal);
        f = read_csv(in);
    } else {
        f = demo_signal(o.demo, o.t_max, o.dt);
    }
    f.validate();
    s.config()[pre + "decompose"] = {{"signal", o.signal.empty() ? "demo:" + o.demo : o.signal},
                                     {"t_max", f.t_end()},
                                     {"dt", f.dt},
                                     {"R", o.R},
                                     {"m", o.m},
                                     {"lemma21", o.lemma21}};
    const auto phi = phi_from_psi(build_psi(BumpSpec{}), -200.0, 0.05, 8001);
    const auto d = decompose(f, phi, o.R, o.m);
    s.signal(pre + "j1.csv", d.J1);
    s.signal(pre + "j2.csv", d.J2);
    s.report(reconstruction_check(f, d), pre + "reconstruction.csv");
    s.report(poisson_mass_check(logspace(1e-3, 1e3, 61)), pre + "poisson_mass.csv");
    if (o.lemma21)
        s.report(check_lemma21(f, nullptr, phi, o.m, {o.R, 2.0 * o.R, 4.0 * o.R}, 1.0, 0.5 * f.t_end()),
                 pre + "lemma21.csv");
}

void do_extremal(Session& s, const ExtremalOpts& o, const std::string& pre) {
    const auto spec = o.rate.spec();
    const double delta = o.delta > 0.0 ? o.delta : default_delta(spec);
    s.config()[pre + "extremal"] = {{"spec", o.rate.echo()},
                                    {"k", o.k},
                                    {"delta", delta},
                                    {"beta", o.beta},
                                    {"verify_lemma42", o.verify_lemma42},
                                    {"build", o.build},
                                    {"eps0", o.eps0},
                                    {"roots", o.roots},
                                    {"seed", o.seed},
                                    {"grid", {{"n_eta", o.grid.n_eta}, {"n_theta", o.grid.n_theta}, {"n_t", o.grid.n_t}}}};
    const auto p = make_params(o.k, delta, o.beta, spec.c1, spec, spec.m);
    s.document(pre + "params.json", p.to_json());
    if (o.verify_lemma42) s.report(verify_lemma42(p, spec, o.grid), pre + "lemma42.csv");
    if (o.build > 0) {
        const auto f = build_extremal(spec, delta, o.beta, spec.c1, o.eps0, static_cast<std::size_t>(o.build));
        s.document(pre + "extremal.json", f.to_json());
        s.report(verify_extremal(f, o.grid), pre + "extremal_verify.csv");
    }
    if (o.roots > 0) s.report(roots_of_unity_check(o.roots, o.per_k, o.seed), pre + "roots_of_unity.csv");
}

void do_bridge(Session& s, const BridgeOpts& o, const std::string& pre) {
    const auto spec = o.rate.spec();
    HypothesisSide h;
    h.side = o.side == "fourier" ? Side::Fourier : Side::Laplace;
    h.M = spec.M;
    h.K = spec.K;
    h.p = spec.p;
    h.m = spec.m;
    h.C_f = o.C_f;
    h.C_f_prime = o.C_f_prime;
    s.config()[pre + "bridge"] = {{"hypothesis", h.to_json()}, {"eps", o.eps},           {"s_points", o.s_points},
                                  {"equivalence", o.equivalence}, {"s_hi", o.s_hi}};
    if (h.side == Side::Fourier) {
        std::vector<std::vector<double>> rows;
        for (const auto& r : eps_tradeoff_table(h, o.s_points, o.eps)) rows.push_back({r.eps, r.s, r.M1, r.K1});
        s.table(pre + "eps_table.csv", {"eps", "s", "M1", "K1"}, rows);
        return;
    }
    const auto conv = laplace_to_fourier(h);
    json doc = conv.side.to_json();
    doc["flags"] = conv.flags;
    s.document(pre + "conversion.json", doc);
    if (o.equivalence) {
        EquivalenceWindow w;
        w.s_hi = o.s_hi;
        s.report(theorem_equivalence_check(spec, o.C_f, o.C_f_prime, w), pre + "equivalence.csv");
    }
}

void do_semigroup(Session& s, const SemigroupOpts& o, const std::string& pre) {
    DiagonalSystem sys;
    if (!o.system.empty()) {
        std::ifstream in(o.system);
        if (!in) throw SpecError("cannot open system file " + o.system);
        sys = DiagonalSystem::from_json(json::parse(in));
    } else {
        sys = polynomial_system(o.modes, o.xi_min, o.xi_max);
    }
    sys.m = o.rate.m;
    sys.validate();
    s.config()[pre + "semigroup"] = {{"system", o.system.empty() ? "polynomial" : o.system},
                                     {"modes", sys.size()},
                                     {"m", o.rate.m},
                                     {"p", o.rate.p},
                                     {"c1", o.rate.c1},
                                     {"t_max", o.t_max},
                                     {"grid", o.grid},
                                     {"seed", o.seed},
                                     {"fit", {{"s_max", o.fit.s_max}, {"margin", o.fit.margin}}},
                                     {"wave", o.wave}};
    const auto fit = fit_M_K(sys, o.fit);
    s.document(pre + "fit.json", {{"M", fit.M.to_json()}, {"K", fit.K.to_json()}});
    EnvelopeSpec spec;
    spec.M = fit.M;
    spec.K = fit.K;
    spec.m = o.rate.m;
    spec.p = parse_p(o.rate.p);
    spec.c1 = o.rate.c1;
    const auto x = gaussian_modes(sys.size(), o.seed);
    const auto rep = corollary_check(sys, x, spec, linspace(0.0, o.t_max, static_cast<std::size_t>(o.grid)));
    std::vector<std::vector<double>> rows;
    for (const auto& r : rep.rows()) rows.push_back({r.grid_point, r.lhs, r.rhs, r.margin});
    s.table(pre + "orbit.csv", {"t", "norm", "envelope", "ratio"}, rows);
    s.report(rep, pre + "corollary.csv");
    if (o.wave) {
        WaveRateInput inp;
        inp.Mtilde = RateExpr::parse(o.mtilde);
        inp.m = o.rate.m;
        inp.c1 = o.rate.c1;
        inp.delta = o.delta;
        inp.C = o.C;
        std::vector<std::vector<double>> wrows;
        for (double t : linspace(0.0, o.t_max, static_cast<std::size_t>(o.grid))) wrows.push_back({t, wave_rate(inp, t)});
        s.table(pre + "wave.csv", {"t", "rate"}, wrows);
        s.report(check_wave_input(inp), pre + "wave_input.csv");
    }
}

void do_suite(Session& s, unsigned long long seed) {
    s.config()["seed"] = seed;
    do_rates(s, RatesOpts{}, "rates_");
    do_mollifier(s, MollifierOpts{}, "mollifier_");
    DecomposeOpts d;
    d.lemma21 = true;
    do_decompose(s, d, "decompose_");
    ExtremalOpts e;
    e.verify_lemma42 = true;
    e.build = 4;
    e.roots = 50;
    e.seed = seed;
    do_extremal(s, e, "extremal_");
    BridgeOpts b;
    b.C_f = 1.0;
    b.C_f_prime = 0.0;
    b.equivalence = true;
    do_bridge(s, b, "bridge_");
    SemigroupOpts g;
    g.seed = seed;
    g.wave = true;
    do_semigroup(s, g, "semigroup_");
}

std::string default_out_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env && *env ? env : ".";
}

}  // namespace

std::string version() { return TAUBERLAB_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical laboratory for quantified Tauberian theorems", "tauberlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    std::string out_dir = default_out_dir();
    auto common = [&](CLI::App* sub) { sub->add_option("--out", out_dir, "output directory"); };

    RatesOpts rates;
    auto* c_rates = app.add_subcommand("rates", "envelope prediction and hypothesis checks");
    rates.rate.add(c_rates);
    c_rates->add_flag("--envelope", rates.envelope, "write t, w_{M_K}(c1 t), envelope");
    c_rates->add_flag("--hypotheses", rates.hypotheses, "check conditions on (M, K)");
    c_rates->add_option("--t-max", rates.t_max);
    c_rates->add_option("--grid", rates.grid)->check(CLI::Range(2, 1 << 24));
    c_rates->add_option("--s-max", rates.s_max);
    c_rates->add_option("--tol", rates.tol)->check(CLI::PositiveNumber);
    common(c_rates);

    MollifierOpts moll;
    auto* c_moll = app.add_subcommand("mollifier", "bump function and derivative bounds");
    c_moll->add_option("--boxes", moll.boxes)->check(CLI::PositiveNumber);
    c_moll->add_option("--eps", moll.eps);
    c_moll->add_option("--grid", moll.grid_n, "samples of psi on [-1, 1] (odd)");
    c_moll->add_option("--j-max", moll.j_max);
    c_moll->add_option("--t-max", moll.phi_t_max, "phi window half-width");
    common(c_moll);

    DecomposeOpts dec;
    auto* c_dec = app.add_subcommand("decompose", "J1/J2 split, Poisson mass, J1 majorant bound");
    c_dec->add_option("--signal", dec.signal, "CSV with header t,re,im");
    c_dec->add_option("--demo", dec.demo, "built-in signal when --signal is absent")
        ->check(CLI::IsMember({"exp", "oscillating", "bump"}));
    c_dec->add_option("--t-max", dec.t_max);
    c_dec->add_option("--dt", dec.dt)->check(CLI::PositiveNumber);
    c_dec->add_option("--R", dec.R)->check(CLI::PositiveNumber);
    c_dec->add_option("--m", dec.m)->check(CLI::PositiveNumber);
    c_dec->add_flag("--lemma21", dec.lemma21, "J1 against the Poisson majorant of f^(m)");
    common(c_dec);

    ExtremalOpts ext;
    auto* c_ext = app.add_subcommand("extremal", "measures on scaled roots of unity");
    ext.rate.add(c_ext);
    c_ext->add_option("--k", ext.k)->check(CLI::PositiveNumber);
    c_ext->add_option("--delta", ext.delta);
    c_ext->add_option("--beta", ext.beta);
    c_ext->add_flag("--verify-lemma42", ext.verify_lemma42, "four-inequality report for one measure");
    c_ext->add_option("--build", ext.build, "number of terms of the extremal function");
    c_ext->add_option("--eps0", ext.eps0);
    c_ext->add_option("--roots", ext.roots, "k_max for the roots-of-unity identity check");
    c_ext->add_option("--seed", ext.seed);
    c_ext->add_option("--n-eta", ext.grid.n_eta);
    c_ext->add_option("--n-theta", ext.grid.n_theta);
    c_ext->add_option("--n-t", ext.grid.n_t);
    common(c_ext);

    BridgeOpts br;
    auto* c_br = app.add_subcommand("bridge", "Fourier/Laplace hypothesis conversions");
    br.rate.add(c_br);
    c_br->add_option("--side", br.side)->check(CLI::IsMember({"laplace", "fourier"}));
    c_br->add_option("--C-f", br.C_f);
    c_br->add_option("--C-f-prime", br.C_f_prime);
    c_br->add_option("--eps", br.eps, "eps values for the trade-off table");
    c_br->add_option("--s", br.s_points, "points for the trade-off table");
    c_br->add_flag("--equivalence", br.equivalence, "check the rate comparison between the two theorems");
    c_br->add_option("--s-max", br.s_hi);
    common(c_br);

    SemigroupOpts sg;
    auto* c_sg = app.add_subcommand("semigroup", "diagonal generator orbits and rates");
    sg.rate.add(c_sg);
    c_sg->add_option("--system", sg.system, "DiagonalSystem JSON");
    c_sg->add_option("--modes", sg.modes);
    c_sg->add_option("--xi-min", sg.xi_min);
    c_sg->add_option("--xi-max", sg.xi_max);
    c_sg->add_option("--t-max", sg.t_max);
    c_sg->add_option("--grid", sg.grid)->check(CLI::Range(2, 1 << 24));
    c_sg->add_option("--seed", sg.seed);
    c_sg->add_option("--fit-s-max", sg.fit.s_max);
    c_sg->add_option("--fit-margin", sg.fit.margin);
    c_sg->add_flag("--wave", sg.wave, "rate formula for local energy decay");
    c_sg->add_option("--mtilde", sg.mtilde);
    c_sg->add_option("--delta", sg.delta);
    c_sg->add_option("--C", sg.C);
    common(c_sg);

    bool all = false;
    unsigned long long suite_seed = 7;
    auto* c_suite = app.add_subcommand("suite", "every module check at desk scale");
    c_suite->add_flag("--all", all, "run every module (the default)");
    c_suite->add_option("--seed", suite_seed);
    common(c_suite);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::vector<std::pair<CLI::App*, std::function<void(Session&)>>> table{
        {c_rates, [&](Session& s) { do_rates(s, rates, ""); }},
        {c_moll, [&](Session& s) { do_mollifier(s, moll, ""); }},
        {c_dec, [&](Session& s) { do_decompose(s, dec, ""); }},
        {c_ext, [&](Session& s) { do_extremal(s, ext, ""); }},
        {c_br, [&](Session& s) { do_bridge(s, br, ""); }},
        {c_sg, [&](Session& s) { do_semigroup(s, sg, ""); }},
        {c_suite, [&](Session& s) { do_suite(s, suite_seed); }},
    };
    try {
        for (const auto& [cmd, action] : table) {
            if (!cmd->parsed()) continue;
            Session session(out_dir, cmd->get_name());
            action(session);
            return session.finish(out);
        }
    } catch (const SpecError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ResolutionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace tauber::cli
