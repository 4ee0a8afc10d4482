#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace tauber {

/// Value of a rate expression with an overflow marker.
///
/// When an intermediate quantity leaves the double range the value is clamped to
/// DBL_MAX and `saturated` is set; callers must check the flag before using the value.
struct EvalResult {
    double value = 0.0;
    bool saturated = false;
};

/// Immutable expression tree for rate functions s -> f(s) on s >= 0.
///
/// The node kinds cover the closed forms that appear in decay-rate work (constants,
/// shifted powers and logarithms, exponentials), their algebra (sum, product, max,
/// positive scaling, composition, real powers, logarithm) and sampled envelopes
/// (piecewise linear, held constant beyond the last knot). Copies share structure.
class RateExpr {
public:
    enum class Kind {
        Const,
        PowerShift,   // c0 + a * s^alpha
        LogShift,     // c0 + a * log(1 + s)
        Exp,          // exp(inner(s))
        Log,          // log(inner(s))
        Power,        // inner(s)^exponent
        Sum,
        Product,
        Compose,      // outer(inner(s))
        Max,
        Scale,        // factor * inner(s)
        PiecewiseLinear,
    };

    static RateExpr constant(double c);
    static RateExpr power_shift(double c0, double a, double alpha);
    static RateExpr log_shift(double c0, double a);
    /// s -> s
    static RateExpr identity() { return power_shift(0.0, 1.0, 1.0); }
    static RateExpr exp(RateExpr inner);
    static RateExpr log(RateExpr inner);
    static RateExpr power(RateExpr inner, double exponent);
    static RateExpr sum(std::vector<RateExpr> terms);
    static RateExpr product(std::vector<RateExpr> factors);
    static RateExpr compose(RateExpr outer, RateExpr inner);
    static RateExpr max(std::vector<RateExpr> terms);
    static RateExpr scale(double factor, RateExpr inner);
    /// Knots must be strictly increasing; the value is held constant outside the knot range.
    static RateExpr piecewise_linear(std::vector<double> knots, std::vector<double> values);

    Kind kind() const;

    EvalResult eval(double s) const;
    /// Shorthand for eval(s).value.
    double operator()(double s) const { return eval(s).value; }

    /// log f(s), evaluated without forming f(s) where the tree allows it (Exp, Scale,
    /// Product, Power, Max, Sum of positive terms). Saturates only if log f itself overflows.
    EvalResult log_eval(double s) const;

    /// Non-decreasing by coefficient sign rules alone (a sufficient condition).
    bool structurally_nondecreasing() const;
    /// Values are >= 0 for s >= 0 by sign rules alone (a sufficient condition).
    bool structurally_nonnegative() const;

    nlohmann::json to_json() const;
    static RateExpr from_json(const nlohmann::json& j);
    /// Accepts inline JSON or "@path" naming a file that contains JSON.
    static RateExpr parse(const std::string& text);

    struct Node;

private:
    explicit RateExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Outcome of checking the rate-function invariants on a window.
struct RateValidity {
    bool finite_at_zero = false;
    bool at_least_two = false;        // f(s) >= 2 at every sampled point
    bool structural_monotone = false;
    bool sampled_monotone = false;    // no decrease across the sampled sweep
    double min_value = 0.0;
    double first_decrease_at = -1.0;  // first sample where f dropped, or -1

    bool valid() const { return finite_at_zero && at_least_two && sampled_monotone; }
};

/// Sampled sweep of [0, s_max] (log-spaced above 1e-3 plus s = 0).
RateValidity validate_rate(const RateExpr& f, double s_max = 1e4, int points_per_decade = 64);

}  // namespace tauber
