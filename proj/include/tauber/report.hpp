#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tauber {

/// One sampled comparison lhs <= rhs (or lhs >= rhs, encoded in `margin`'s sign convention).
struct ReportRow {
    std::string name;
    double grid_point = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = true;
};

/// A scalar constant extracted from a scan, e.g. the smallest C making an inequality hold.
struct Observation {
    std::string name;
    double value = std::numeric_limits<double>::quiet_NaN();
    double worst_point = std::numeric_limits<double>::quiet_NaN();
    bool pass = true;
};

/// Named residual scan over a grid.
///
/// `rows` carry the per-point detail (serialized to CSV), `observations` the summary
/// constants. The report passes iff every observation passes.
class VerificationReport {
public:
    VerificationReport() = default;
    explicit VerificationReport(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    void add_row(ReportRow row) { rows_.push_back(std::move(row)); }
    void observe(std::string name, double value, double worst_point, bool pass);
    void flag(std::string text);
    void count_skipped(std::size_t n = 1) { skipped_ += n; }
    void merge(const VerificationReport& other, const std::string& prefix = {});

    bool pass() const;
    std::size_t skipped() const { return skipped_; }
    const std::vector<ReportRow>& rows() const { return rows_; }
    const std::vector<Observation>& observations() const { return observations_; }
    const std::vector<std::string>& flags() const { return flags_; }
    bool has_flag(const std::string& text) const;

    /// Throws std::out_of_range if no observation with that name exists.
    const Observation& observation(const std::string& name) const;
    double value(const std::string& name) const { return observation(name).value; }

    nlohmann::json to_json() const;
    void write_csv(std::ostream& os) const;

private:
    std::string name_;
    std::vector<ReportRow> rows_;
    std::vector<Observation> observations_;
    std::vector<std::string> flags_;
    std::size_t skipped_ = 0;
};

/// Fixed 17-significant-digit formatting used for every CSV number.
std::string format_number(double x);

}  // namespace tauber
