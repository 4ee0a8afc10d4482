#include "tauber/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>

#include "tauber/errors.hpp"

namespace tauber {

namespace {

using cplx = std::complex<double>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using FftwBuf = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuf alloc(std::size_t n) {
    return FftwBuf(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

std::size_t fft_size(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<cplx> fft_convolve(std::span<const cplx> a, std::span<const double> b, double h) {
    const std::size_t out_n = a.size() + b.size() - 1;
    const std::size_t n = fft_size(out_n);
    auto fa = alloc(n), fb = alloc(n);
    std::fill_n(&fa[0][0], 2 * n, 0.0);
    std::fill_n(&fb[0][0], 2 * n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        fa[i][0] = a[i].real();
        fa[i][1] = a[i].imag();
    }
    for (std::size_t i = 0; i < b.size(); ++i) fb[i][0] = b[i];
    const int ni = static_cast<int>(n);
    fftw_plan pa = fftw_plan_dft_1d(ni, fa.get(), fa.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan pb = fftw_plan_dft_1d(ni, fb.get(), fb.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx x(fa[i][0], fa[i][1]), y(fb[i][0], fb[i][1]);
        const cplx z = x * y;
        fa[i][0] = z.real();
        fa[i][1] = z.imag();
    }
    fftw_plan pi = fftw_plan_dft_1d(ni, fa.get(), fa.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(pi);
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pi);
    std::vector<cplx> out(out_n);
    const double scale = h / static_cast<double>(n);
    for (std::size_t i = 0; i < out_n; ++i) out[i] = cplx(fa[i][0], fa[i][1]) * scale;
    return out;
}

std::vector<cplx> direct_convolve(std::span<const cplx> a, std::span<const double> b, double h) {
    std::vector<cplx> out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx ai = a[i] * h;
        if (ai == cplx{}) continue;
        cplx* o = out.data() + i;
        for (std::size_t j = 0; j < b.size(); ++j) o[j] += ai * b[j];
    }
    return out;
}

bool use_fft(ConvMethod m, std::size_t na, std::size_t nb) {
    if (m == ConvMethod::Fft) return true;
    if (m == ConvMethod::Direct) return false;
    return std::max(na, nb) > kDirectConvLimit;
}

}  // namespace

std::vector<cplx> convolve(std::span<const cplx> a, std::span<const double> b, double h,
                           ConvMethod method) {
    if (a.empty() || b.empty()) return {};
    return use_fft(method, a.size(), b.size()) ? fft_convolve(a, b, h) : direct_convolve(a, b, h);
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, double h,
                             ConvMethod method) {
    std::vector<cplx> ac(a.begin(), a.end());
    const auto c = convolve(std::span<const cplx>(ac), b, h, method);
    std::vector<double> out(c.size());
    std::transform(c.begin(), c.end(), out.begin(), [](cplx z) { return z.real(); });
    return out;
}

std::vector<cplx> convolve_same(std::span<const cplx> a, std::span<const double> kernel, double h,
                                ConvMethod method) {
    if (kernel.size() % 2 == 0) throw SpecError("convolve_same needs an odd kernel length");
    const std::size_t L = kernel.size() / 2;
    const auto full = convolve(a, kernel, h, method);
    return std::vector<cplx>(full.begin() + static_cast<std::ptrdiff_t>(L),
                             full.begin() + static_cast<std::ptrdiff_t>(L + a.size()));
}

}  // namespace tauber
