#include "tauber/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tauber/errors.hpp"
#include "tauber/report.hpp"

namespace tauber {

void SampledSignal::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw SpecError("signal grid step must be positive");
    if (!std::isfinite(t0)) throw SpecError("signal start must be finite");
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw SpecError("signal values must be finite");
    if (mollifier) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i].imag() != 0.0) throw SpecError("mollifier samples must be real");
            if (std::abs(t(i)) > 1.0 + 1e-12 && values[i] != cplx{})
                throw SpecError("mollifier samples must vanish outside [-1, 1]");
        }
    }
}

cplx SampledSignal::at_linear(double x) const {
    if (values.empty()) return {};
    const double u = (x - t0) / dt;
    const double n1 = static_cast<double>(values.size() - 1);
    if (u < 0.0 || u > n1) return {};
    const auto i = std::min(static_cast<std::size_t>(u), values.size() - 1);
    if (i + 1 >= values.size()) return values[i];
    const double f = u - static_cast<double>(i);
    return values[i] * (1.0 - f) + values[i + 1] * f;
}

cplx SampledSignal::at_cubic(double x) const {
    const std::size_t n = values.size();
    if (n < 4) return at_linear(x);
    const double u = (x - t0) / dt;
    if (u < 0.0 || u > static_cast<double>(n - 1)) return {};
    auto i = static_cast<std::ptrdiff_t>(u);
    if (i >= static_cast<std::ptrdiff_t>(n - 1)) i = static_cast<std::ptrdiff_t>(n - 2);
    const double f = u - static_cast<double>(i);
    auto v = [&](std::ptrdiff_t k) {
        k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(n - 1));
        return values[static_cast<std::size_t>(k)];
    };
    const cplx p0 = v(i - 1), p1 = v(i), p2 = v(i + 1), p3 = v(i + 2);
    const double f2 = f * f, f3 = f2 * f;
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f2 +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f3);
}

cplx SampledSignal::integral() const {
    if (values.size() < 2) return {};
    cplx acc = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += values[i];
    return acc * dt;
}

double SampledSignal::lp_norm(double p) const {
    if (std::isinf(p)) return sup_abs();
    if (values.size() < 2) return 0.0;
    double acc = 0.5 * (std::pow(std::abs(values.front()), p) + std::pow(std::abs(values.back()), p));
    for (std::size_t i = 1; i + 1 < values.size(); ++i) acc += std::pow(std::abs(values[i]), p);
    return std::pow(acc * dt, 1.0 / p);
}

double SampledSignal::sup_abs() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> SampledSignal::real_parts() const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return v.real(); });
    return out;
}

std::vector<double> SampledSignal::abs_values() const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), [](cplx v) { return std::abs(v); });
    return out;
}

SampledSignal SampledSignal::from_function(double t0, double dt, std::size_t n,
                                           const std::function<cplx(double)>& f) {
    SampledSignal s;
    s.t0 = t0;
    s.dt = dt;
    s.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.values[i] = f(s.t(i));
    return s;
}

SampledSignal SampledSignal::from_real(double t0, double dt, std::span<const double> v) {
    SampledSignal s;
    s.t0 = t0;
    s.dt = dt;
    s.values.assign(v.begin(), v.end());
    return s;
}

void write_csv(std::ostream& os, const SampledSignal& s) {
    os << "t,re,im\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << format_number(s.t(i)) << ',' << format_number(s.values[i].real()) << ','
           << format_number(s.values[i].imag()) << '\n';
}

SampledSignal read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("t,re,im", 0) != 0)
        throw SpecError("signal CSV must start with header t,re,im");
    std::vector<double> ts;
    SampledSignal s;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw SpecError("malformed signal CSV row: " + line);
        ts.push_back(std::stod(a));
        s.values.emplace_back(std::stod(b), std::stod(c));
    }
    if (ts.empty()) throw SpecError("signal CSV has no rows");
    s.t0 = ts.front();
    s.dt = ts.size() > 1 ? (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1) : 1.0;
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (std::abs(ts[i] - s.t(i)) > 1e-9 * std::max(1.0, std::abs(ts[i])))
            throw SpecError("signal CSV grid is not uniform");
    return s;
}

namespace {

static_assert(sizeof(double) == 8);

void put_f64(std::ostream& os, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
}

double get_f64(std::istream& is) {
    char buf[8];
    if (!is.read(buf, 8)) throw SpecError("truncated binary signal");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_binary(std::ostream& os, const SampledSignal& s) {
    put_f64(os, s.t0);
    put_f64(os, s.dt);
    put_f64(os, static_cast<double>(s.size()));
    for (const auto& v : s.values) {
        put_f64(os, v.real());
        put_f64(os, v.imag());
    }
}

SampledSignal read_binary(std::istream& is) {
    SampledSignal s;
    s.t0 = get_f64(is);
    s.dt = get_f64(is);
    const double n = get_f64(is);
    if (!(n >= 0.0) || n != std::floor(n) || n > 1e12) throw SpecError("bad binary signal length");
    s.values.resize(static_cast<std::size_t>(n));
    for (auto& v : s.values) {
        const double re = get_f64(is);
        v = {re, get_f64(is)};
    }
    return s;
}

}  // namespace tauber
