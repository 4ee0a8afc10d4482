#include "tauber/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tauber {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

nlohmann::json number(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void VerificationReport::observe(std::string name, double value, double worst_point, bool pass) {
    observations_.push_back({std::move(name), value, worst_point, pass});
}

void VerificationReport::flag(std::string text) {
    if (!has_flag(text)) flags_.push_back(std::move(text));
}

bool VerificationReport::has_flag(const std::string& text) const {
    return std::find(flags_.begin(), flags_.end(), text) != flags_.end();
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
    for (auto row : other.rows_) {
        row.name = prefix + row.name;
        rows_.push_back(std::move(row));
    }
    for (auto obs : other.observations_) {
        obs.name = prefix + obs.name;
        observations_.push_back(std::move(obs));
    }
    for (const auto& f : other.flags_) flag(prefix + f);
    skipped_ += other.skipped_;
}

bool VerificationReport::pass() const {
    return std::all_of(observations_.begin(), observations_.end(),
                       [](const Observation& o) { return o.pass; });
}

const Observation& VerificationReport::observation(const std::string& name) const {
    for (const auto& o : observations_)
        if (o.name == name) return o;
    throw std::out_of_range("no observation named '" + name + "' in report '" + name_ + "'");
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["name"] = name_;
    j["pass"] = pass();
    j["skipped"] = skipped_;
    j["flags"] = flags_;
    auto& obs = j["observations"] = nlohmann::json::array();
    for (const auto& o : observations_)
        obs.push_back({{"name", o.name},
                       {"value", number(o.value)},
                       {"worst_point", number(o.worst_point)},
                       {"pass", o.pass}});
    j["rows"] = rows_.size();
    return j;
}

void VerificationReport::write_csv(std::ostream& os) const {
    os << "name,grid_point,lhs,rhs,margin,pass\n";
    for (const auto& r : rows_) {
        os << csv_field(r.name) << ',' << format_number(r.grid_point) << ','
           << format_number(r.lhs) << ',' << format_number(r.rhs) << ','
           << format_number(r.margin) << ',' << (r.pass ? 1 : 0) << '\n';
    }
}

}  // namespace tauber
