#include "tauber/rate_expr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>

#include "tauber/errors.hpp"
#include "tauber/grid.hpp"

namespace tauber {

namespace {

constexpr double kBig = std::numeric_limits<double>::max();
constexpr double kLogBig = 709.782712893384;  // log(DBL_MAX)

EvalResult saturated() { return {kBig, true}; }

EvalResult checked(double v, bool sat) {
    if (sat || std::isinf(v)) return saturated();
    return {v, false};
}

}  // namespace

struct RateExpr::Node {
    Kind kind;
    double a = 0.0;  // c / c0 / factor / exponent
    double b = 0.0;  // a (slope)
    double c = 0.0;  // alpha
    std::vector<RateExpr> children;
    std::vector<double> knots;
    std::vector<double> values;
};

RateExpr::Kind RateExpr::kind() const { return node_->kind; }

RateExpr RateExpr::constant(double c) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->a = c;
    return RateExpr(std::move(n));
}

RateExpr RateExpr::power_shift(double c0, double a, double alpha) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::PowerShift;
    n->a = c0;
    n->b = a;
    n->c = alpha;
    return RateExpr(std::move(n));
}

RateExpr RateExpr::log_shift(double c0, double a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::LogShift;
    n->a = c0;
    n->b = a;
    return RateExpr(std::move(n));
}

namespace {

template <class... Args>
std::shared_ptr<RateExpr::Node> make_node(RateExpr::Kind k, std::vector<RateExpr> children,
                                          double a = 0.0) {
    if (children.empty()) throw SpecError("rate expression node needs at least one child");
    auto n = std::make_shared<RateExpr::Node>();
    n->kind = k;
    n->a = a;
    n->children = std::move(children);
    return n;
}

}  // namespace

RateExpr RateExpr::exp(RateExpr inner) { return RateExpr(make_node(Kind::Exp, {std::move(inner)})); }
RateExpr RateExpr::log(RateExpr inner) { return RateExpr(make_node(Kind::Log, {std::move(inner)})); }
RateExpr RateExpr::power(RateExpr inner, double exponent) {
    return RateExpr(make_node(Kind::Power, {std::move(inner)}, exponent));
}
RateExpr RateExpr::sum(std::vector<RateExpr> terms) {
    return RateExpr(make_node(Kind::Sum, std::move(terms)));
}
RateExpr RateExpr::product(std::vector<RateExpr> factors) {
    return RateExpr(make_node(Kind::Product, std::move(factors)));
}
RateExpr RateExpr::compose(RateExpr outer, RateExpr inner) {
    return RateExpr(make_node(Kind::Compose, {std::move(outer), std::move(inner)}));
}
RateExpr RateExpr::max(std::vector<RateExpr> terms) {
    return RateExpr(make_node(Kind::Max, std::move(terms)));
}
RateExpr RateExpr::scale(double factor, RateExpr inner) {
    return RateExpr(make_node(Kind::Scale, {std::move(inner)}, factor));
}

RateExpr RateExpr::piecewise_linear(std::vector<double> knots, std::vector<double> values) {
    if (knots.empty() || knots.size() != values.size())
        throw SpecError("piecewise-linear rate needs matching, non-empty knots and values");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1])) throw SpecError("piecewise-linear knots must increase");
    auto n = std::make_shared<Node>();
    n->kind = Kind::PiecewiseLinear;
    n->knots = std::move(knots);
    n->values = std::move(values);
    return RateExpr(std::move(n));
}

EvalResult RateExpr::eval(double s) const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Const:
            return {n.a, false};
        case Kind::PowerShift: {
            const double p = (n.c == 1.0) ? s : std::pow(s, n.c);
            return checked(n.a + n.b * p, false);
        }
        case Kind::LogShift:
            return checked(n.a + n.b * std::log1p(s), false);
        case Kind::Exp: {
            const auto in = n.children[0].eval(s);
            if (in.saturated || in.value > kLogBig) return saturated();
            return {std::exp(in.value), false};
        }
        case Kind::Log: {
            const auto in = n.children[0].log_eval(s);
            return in.saturated ? saturated() : in;
        }
        case Kind::Power: {
            const auto lg = n.children[0].log_eval(s);
            if (!lg.saturated && std::isfinite(lg.value)) {
                const double e = n.a * lg.value;
                if (e > kLogBig) return saturated();
                return {std::exp(e), false};
            }
            const auto in = n.children[0].eval(s);
            if (in.saturated) return n.a < 0 ? EvalResult{0.0, false} : saturated();
            return checked(std::pow(in.value, n.a), false);
        }
        case Kind::Sum: {
            double acc = 0.0;
            for (const auto& ch : n.children) {
                const auto r = ch.eval(s);
                if (r.saturated) return saturated();
                acc += r.value;
            }
            return checked(acc, false);
        }
        case Kind::Product: {
            double acc = 1.0;
            for (const auto& ch : n.children) {
                const auto r = ch.eval(s);
                if (r.saturated) return saturated();
                acc *= r.value;
            }
            return checked(acc, false);
        }
        case Kind::Compose: {
            const auto in = n.children[1].eval(s);
            if (in.saturated) return saturated();
            return n.children[0].eval(in.value);
        }
        case Kind::Max: {
            double acc = -kBig;
            for (const auto& ch : n.children) {
                const auto r = ch.eval(s);
                if (r.saturated) return saturated();
                acc = std::max(acc, r.value);
            }
            return {acc, false};
        }
        case Kind::Scale: {
            const auto in = n.children[0].eval(s);
            if (in.saturated) return n.a == 0.0 ? EvalResult{0.0, false} : saturated();
            return checked(n.a * in.value, false);
        }
        case Kind::PiecewiseLinear: {
            const auto& k = n.knots;
            const auto& v = n.values;
            if (s <= k.front()) return {v.front(), false};
            if (s >= k.back()) return {v.back(), false};
            const auto it = std::upper_bound(k.begin(), k.end(), s);
            const auto i = static_cast<std::size_t>(it - k.begin());
            const double f = (s - k[i - 1]) / (k[i] - k[i - 1]);
            return {v[i - 1] + f * (v[i] - v[i - 1]), false};
        }
    }
    return saturated();
}

EvalResult RateExpr::log_eval(double s) const {
    const Node& n = *node_;
    auto lg_of_value = [&]() -> EvalResult {
        const auto r = eval(s);
        if (r.saturated) return saturated();
        return {std::log(r.value), false};
    };
    switch (n.kind) {
        case Kind::Exp:
            return n.children[0].eval(s);
        case Kind::Scale: {
            if (!(n.a > 0.0)) return lg_of_value();
            const auto in = n.children[0].log_eval(s);
            if (in.saturated) return saturated();
            return {std::log(n.a) + in.value, false};
        }
        case Kind::Product: {
            double acc = 0.0;
            for (const auto& ch : n.children) {
                const auto r = ch.log_eval(s);
                if (r.saturated) return saturated();
                acc += r.value;
            }
            return checked(acc, false);
        }
        case Kind::Power: {
            const auto in = n.children[0].log_eval(s);
            if (in.saturated) return n.a < 0 ? EvalResult{-kBig, false} : saturated();
            return checked(n.a * in.value, false);
        }
        case Kind::Max: {
            double acc = -std::numeric_limits<double>::infinity();
            for (const auto& ch : n.children) {
                const auto r = ch.log_eval(s);
                if (r.saturated) return saturated();
                acc = std::max(acc, r.value);
            }
            return {acc, false};
        }
        case Kind::Sum: {
            std::vector<double> logs;
            logs.reserve(n.children.size());
            for (const auto& ch : n.children) {
                if (!ch.structurally_nonnegative()) return lg_of_value();
                const auto r = ch.log_eval(s);
                if (r.saturated) return saturated();
                logs.push_back(r.value);
            }
            const double top = *std::max_element(logs.begin(), logs.end());
            if (std::isinf(top)) return {top, false};
            double acc = 0.0;
            for (double l : logs) acc += std::exp(l - top);
            return {top + std::log(acc), false};
        }
        case Kind::Compose: {
            const auto in = n.children[1].eval(s);
            if (in.saturated) return saturated();
            return n.children[0].log_eval(in.value);
        }
        default:
            return lg_of_value();
    }
}

bool RateExpr::structurally_nonnegative() const {
    const Node& n = *node_;
    switch (n.kind) {
        case Kind::Const: return n.a >= 0.0;
        case Kind::PowerShift: return n.a >= 0.0 && n.b >= 0.0;
        case Kind::LogShift: return n.a >= 0.0 && n.b >= 0.0;
        case Kind::Exp: return true;
        case Kind::Power: return true;
        case Kind::Log: return false;
        case Kind::Sum:
        case Kind::Product:
            return std::all_of(n.children.begin(), n.children.end(),
                               [](const RateExpr& c) { return c.structurally_nonnegative(); });
        case Kind::Max:
            return std::any_of(n.children.begin(), n.children.end(),
                               [](const RateExpr& c) { return c.structurally_nonnegative(); });
        case Kind::Compose: return n.children[0].structurally_nonnegative();
        case Kind::Scale: return n.a >= 0.0 && n.children[0].structurally_nonnegative();
        case Kind::PiecewiseLinear:
            return std::all_of(n.values.begin(), n.values.end(), [](double v) { return v >= 0.0; });
    }
    return false;
}

bool RateExpr::structurally_nondecreasing() const {
    const Node& n = *node_;
    auto all_nd = [&] {
        return std::all_of(n.children.begin(), n.children.end(),
                           [](const RateExpr& c) { return c.structurally_nondecreasing(); });
    };
    switch (n.kind) {
        case Kind::Const: return true;
        case Kind::PowerShift: return n.b >= 0.0 && n.c >= 0.0;
        case Kind::LogShift: return n.b >= 0.0;
        case Kind::Exp:
        case Kind::Log:
        case Kind::Max:
        case Kind::Sum:
        case Kind::Compose:
            return all_nd();
        case Kind::Power:
            return n.a >= 0.0 && all_nd() && n.children[0].structurally_nonnegative();
        case Kind::Product:
            return all_nd() && std::all_of(n.children.begin(), n.children.end(),
                                           [](const RateExpr& c) { return c.structurally_nonnegative(); });
        case Kind::Scale: return n.a >= 0.0 && all_nd();
        case Kind::PiecewiseLinear:
            return std::is_sorted(n.values.begin(), n.values.end());
    }
    return false;
}

nlohmann::json RateExpr::to_json() const {
    const Node& n = *node_;
    using nlohmann::json;
    auto kids = [&] {
        json arr = json::array();
        for (const auto& c : n.children) arr.push_back(c.to_json());
        return arr;
    };
    switch (n.kind) {
        case Kind::Const: return {{"kind", "const"}, {"c", n.a}};
        case Kind::PowerShift: return {{"kind", "power_shift"}, {"c0", n.a}, {"a", n.b}, {"alpha", n.c}};
        case Kind::LogShift: return {{"kind", "log_shift"}, {"c0", n.a}, {"a", n.b}};
        case Kind::Exp: return {{"kind", "exp"}, {"inner", n.children[0].to_json()}};
        case Kind::Log: return {{"kind", "log"}, {"inner", n.children[0].to_json()}};
        case Kind::Power:
            return {{"kind", "power"}, {"exponent", n.a}, {"inner", n.children[0].to_json()}};
        case Kind::Sum: return {{"kind", "sum"}, {"terms", kids()}};
        case Kind::Product: return {{"kind", "product"}, {"factors", kids()}};
        case Kind::Max: return {{"kind", "max"}, {"terms", kids()}};
        case Kind::Compose:
            return {{"kind", "compose"}, {"outer", n.children[0].to_json()},
                    {"inner", n.children[1].to_json()}};
        case Kind::Scale:
            return {{"kind", "scale"}, {"factor", n.a}, {"inner", n.children[0].to_json()}};
        case Kind::PiecewiseLinear:
            return {{"kind", "piecewise_linear"}, {"s", n.knots}, {"v", n.values}};
    }
    return {};
}

RateExpr RateExpr::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw SpecError("rate expression must be an object with 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    auto num = [&](const char* key, double dflt = std::numeric_limits<double>::quiet_NaN()) {
        if (!j.contains(key)) {
            if (std::isnan(dflt)) throw SpecError(std::string("rate expression '") + kind + "' needs '" + key + "'");
            return dflt;
        }
        return j.at(key).get<double>();
    };
    auto list = [&](const char* key) {
        std::vector<RateExpr> out;
        for (const auto& c : j.at(key)) out.push_back(from_json(c));
        return out;
    };
    try {
        if (kind == "const") return constant(num("c"));
        if (kind == "power_shift") return power_shift(num("c0"), num("a"), num("alpha", 1.0));
        if (kind == "log_shift") return log_shift(num("c0"), num("a"));
        if (kind == "identity") return identity();
        if (kind == "exp") return exp(from_json(j.at("inner")));
        if (kind == "log") return log(from_json(j.at("inner")));
        if (kind == "power") return power(from_json(j.at("inner")), num("exponent"));
        if (kind == "sum") return sum(list("terms"));
        if (kind == "product") return product(list("factors"));
        if (kind == "max") return max(list("terms"));
        if (kind == "compose") return compose(from_json(j.at("outer")), from_json(j.at("inner")));
        if (kind == "scale") return scale(num("factor"), from_json(j.at("inner")));
        if (kind == "piecewise_linear")
            return piecewise_linear(j.at("s").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed rate expression: ") + e.what());
    }
    throw SpecError("unknown rate expression kind '" + kind + "'");
}

RateExpr RateExpr::parse(const std::string& text) {
    std::string body = text;
    if (!text.empty() && text[0] == '@') {
        std::ifstream in(text.substr(1));
        if (!in) throw SpecError("cannot open rate expression file " + text.substr(1));
        std::stringstream ss;
        ss << in.rdbuf();
        body = ss.str();
    }
    try {
        return from_json(nlohmann::json::parse(body));
    } catch (const nlohmann::json::parse_error& e) {
        throw SpecError(std::string("rate expression is not valid JSON: ") + e.what());
    }
}

RateValidity validate_rate(const RateExpr& f, double s_max, int points_per_decade) {
    RateValidity v;
    const auto f0 = f.eval(0.0);
    v.finite_at_zero = !f0.saturated && std::isfinite(f0.value);
    v.structural_monotone = f.structurally_nondecreasing();
    std::vector<double> grid{0.0};
    const double lo = std::min(1e-3, s_max);
    for (double s : logspace(lo, s_max, decade_count(lo, s_max, points_per_decade))) grid.push_back(s);
    double prev = -std::numeric_limits<double>::infinity();
    v.min_value = std::numeric_limits<double>::infinity();
    v.sampled_monotone = true;
    for (double s : grid) {
        const auto r = f.eval(s);
        // Saturated points are treated as +inf: still monotone, still >= 2.
        const double val = r.saturated ? std::numeric_limits<double>::infinity() : r.value;
        v.min_value = std::min(v.min_value, val);
        if (val < prev * (1.0 - 1e-14) - 1e-300 && v.sampled_monotone) {
            v.sampled_monotone = false;
            v.first_decrease_at = s;
        }
        prev = std::max(prev, val);
    }
    v.at_least_two = v.min_value >= 2.0;
    return v;
}

}  // namespace tauber
