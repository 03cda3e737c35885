// Compiled with -mavx2 -mfma; only reached through avx2_table() after a
// runtime CPU check.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "chewseg/kernels.hpp"

namespace chewseg::kernels {
namespace {

inline double hsum(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void energy_avx2(std::span<const double> ax, std::span<const double> ay, std::span<const double> az,
                 std::span<double> out) {
    const std::size_t n = out.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(ax.data() + i);
        const __m256d y = _mm256_loadu_pd(ay.data() + i);
        const __m256d z = _mm256_loadu_pd(az.data() + i);
        __m256d e = _mm256_mul_pd(x, x);
        e = _mm256_add_pd(e, _mm256_mul_pd(y, y));
        e = _mm256_add_pd(e, _mm256_mul_pd(z, z));
        _mm256_storeu_pd(out.data() + i, e);
    }
    for (; i < n; ++i) out[i] = ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i];
}

void tilt_cosine_avx2(QuaternionSoA q, std::span<double> out) {
    const std::size_t n = out.size();
    const __m256d lo = _mm256_set1_pd(-1.0);
    const __m256d hi = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d w = _mm256_loadu_pd(q.w.data() + i);
        const __m256d x = _mm256_loadu_pd(q.x.data() + i);
        const __m256d y = _mm256_loadu_pd(q.y.data() + i);
        const __m256d z = _mm256_loadu_pd(q.z.data() + i);
        const __m256d w2 = _mm256_mul_pd(w, w);
        const __m256d x2 = _mm256_mul_pd(x, x);
        const __m256d y2 = _mm256_mul_pd(y, y);
        const __m256d z2 = _mm256_mul_pd(z, z);
        const __m256d num = _mm256_add_pd(_mm256_sub_pd(_mm256_sub_pd(w2, x2), y2), z2);
        const __m256d den = _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(w2, x2), y2), z2);
        __m256d c = _mm256_div_pd(num, den);
        c = _mm256_min_pd(_mm256_max_pd(c, lo), hi);
        _mm256_storeu_pd(out.data() + i, c);
    }
    for (; i < n; ++i) {
        const double w2 = q.w[i] * q.w[i];
        const double x2 = q.x[i] * q.x[i];
        const double y2 = q.y[i] * q.y[i];
        const double z2 = q.z[i] * q.z[i];
        out[i] = std::clamp((w2 - x2 - y2 + z2) / (w2 + x2 + y2 + z2), -1.0, 1.0);
    }
}

double sum_avx2(std::span<const double> x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
    double s = hsum(acc);
    for (; i < x.size(); ++i) s += x[i];
    return s;
}

double sum_squares_avx2(std::span<const double> x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d v = _mm256_loadu_pd(x.data() + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < x.size(); ++i) s += x[i] * x[i];
    return s;
}

CentralSums central_sums_avx2(std::span<const double> x, double mean) {
    const __m256d m = _mm256_set1_pd(mean);
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    __m256d a4 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), m);
        const __m256d d2 = _mm256_mul_pd(d, d);
        a2 = _mm256_add_pd(a2, d2);
        a3 = _mm256_fmadd_pd(d2, d, a3);
        a4 = _mm256_fmadd_pd(d2, d2, a4);
    }
    CentralSums s{hsum(a2), hsum(a3), hsum(a4)};
    for (; i < x.size(); ++i) {
        const double d = x[i] - mean;
        const double d2 = d * d;
        s.d2 += d2;
        s.d3 += d2 * d;
        s.d4 += d2 * d2;
    }
    return s;
}

double centered_dot_avx2(std::span<const double> x, std::span<const double> y, double mx, double my) {
    const __m256d vx = _mm256_set1_pd(mx);
    const __m256d vy = _mm256_set1_pd(my);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= x.size(); i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), vx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(y.data() + i), vy);
        acc = _mm256_fmadd_pd(dx, dy, acc);
    }
    double s = hsum(acc);
    for (; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s;
}

// Each lane l walks samples l, l+4, l+8, ... with a phasor that is rotated
// by 4*theta per step; the phasors are re-seeded from exact sin/cos every
// kReseed steps so the recurrence error stays near machine precision.
void dft_magnitudes_avx2(std::span<const double> x, std::span<const std::size_t> bins, std::span<double> out) {
    constexpr std::size_t kReseed = 64;
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < bins.size(); ++j) {
        if (n == 0) {
            out[j] = 0.0;
            continue;
        }
        const std::size_t k = bins[j] % n;
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        const __m256d step_c = _mm256_set1_pd(std::cos(4.0 * theta));
        const __m256d step_s = _mm256_set1_pd(-std::sin(4.0 * theta));

        __m256d re = _mm256_setzero_pd();
        __m256d im = _mm256_setzero_pd();
        __m256d pc = _mm256_setzero_pd();
        __m256d ps = _mm256_setzero_pd();
        std::size_t i = 0;
        std::size_t steps = 0;
        for (; i + 4 <= n; i += 4, ++steps) {
            if (steps % kReseed == 0) {
                alignas(32) double c[4];
                alignas(32) double s[4];
                for (std::size_t l = 0; l < 4; ++l) {
                    const double a = 2.0 * std::numbers::pi * static_cast<double>((k * (i + l)) % n) /
                                     static_cast<double>(n);
                    c[l] = std::cos(a);
                    s[l] = -std::sin(a);
                }
                pc = _mm256_load_pd(c);
                ps = _mm256_load_pd(s);
            }
            const __m256d v = _mm256_loadu_pd(x.data() + i);
            re = _mm256_fmadd_pd(v, pc, re);
            im = _mm256_fmadd_pd(v, ps, im);
            // (pc + i ps) * (step_c + i step_s)
            const __m256d nc = _mm256_fmsub_pd(pc, step_c, _mm256_mul_pd(ps, step_s));
            const __m256d ns = _mm256_fmadd_pd(pc, step_s, _mm256_mul_pd(ps, step_c));
            pc = nc;
            ps = ns;
        }
        double sre = hsum(re);
        double sim = hsum(im);
        for (; i < n; ++i) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            sre += x[i] * std::cos(a);
            sim -= x[i] * std::sin(a);
        }
        out[j] = std::hypot(sre, sim);
    }
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{
        Isa::Avx2,         energy_avx2,        tilt_cosine_avx2,   sum_avx2,
        sum_squares_avx2,  central_sums_avx2,  centered_dot_avx2,  dft_magnitudes_avx2,
    };
    return &table;
}

}  // namespace chewseg::kernels
