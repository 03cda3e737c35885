#include <algorithm>
#include <cmath>
#include <numbers>

#include "chewseg/kernels.hpp"

namespace chewseg::kernels {
namespace {

void energy_scalar(std::span<const double> ax, std::span<const double> ay, std::span<const double> az,
                   std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i];
    }
}

void tilt_cosine_scalar(QuaternionSoA q, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double w2 = q.w[i] * q.w[i];
        const double x2 = q.x[i] * q.x[i];
        const double y2 = q.y[i] * q.y[i];
        const double z2 = q.z[i] * q.z[i];
        const double c = (w2 - x2 - y2 + z2) / (w2 + x2 + y2 + z2);
        out[i] = std::clamp(c, -1.0, 1.0);
    }
}

double sum_scalar(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double sum_squares_scalar(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

CentralSums central_sums_scalar(std::span<const double> x, double mean) {
    CentralSums s;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        s.d2 += d2;
        s.d3 += d2 * d;
        s.d4 += d2 * d2;
    }
    return s;
}

double centered_dot_scalar(std::span<const double> x, std::span<const double> y, double mx, double my) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s;
}

void dft_magnitudes_scalar(std::span<const double> x, std::span<const std::size_t> bins, std::span<double> out) {
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < bins.size(); ++j) {
        double re = 0.0;
        double im = 0.0;
        const std::size_t k = n == 0 ? 0 : bins[j] % n;
        for (std::size_t i = 0; i < n; ++i) {
            // exact phase index keeps the reference free of recurrence drift
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            re += x[i] * std::cos(angle);
            im -= x[i] * std::sin(angle);
        }
        out[j] = std::hypot(re, im);
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        Isa::Scalar,         energy_scalar,         tilt_cosine_scalar,   sum_scalar,
        sum_squares_scalar,  central_sums_scalar,   centered_dot_scalar,  dft_magnitudes_scalar,
    };
    return table;
}

}  // namespace chewseg::kernels
