#pragma once

// Data-parallel inner loops used by signal derivation and feature
// extraction. Every kernel has a scalar reference implementation; an AVX2
// variant is compiled when the toolchain targets x86-64 and is picked at
// runtime when the CPU supports AVX2+FMA. The two are equivalence-tested.
//
// The AVX2 variants reassociate sums, so results agree with the scalar
// reference to rounding, not bit-for-bit. Pin the ISA (select()) when
// byte-identical output across machines matters.

#include <cstddef>
#include <span>
#include <string_view>

namespace chewseg::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
Isa parse_isa(std::string_view text);

/// Quaternion components as structure-of-arrays.
struct QuaternionSoA {
    std::span<const double> w, x, y, z;
};

struct CentralSums {
    double d2 = 0.0;  // sum (x - mean)^2
    double d3 = 0.0;
    double d4 = 0.0;
};

struct KernelTable {
    Isa isa;

    // out[i] = ax^2 + ay^2 + az^2
    void (*energy)(std::span<const double> ax, std::span<const double> ay, std::span<const double> az,
                   std::span<double> out);

    // z component of q [0,0,1] q^-1, normalised by |q|^2 and clamped to [-1, 1]
    void (*tilt_cosine)(QuaternionSoA q, std::span<double> out);

    double (*sum)(std::span<const double> x);
    double (*sum_squares)(std::span<const double> x);
    CentralSums (*central_sums)(std::span<const double> x, double mean);

    // sum (x - mx)(y - my)
    double (*centered_dot)(std::span<const double> x, std::span<const double> y, double mx, double my);

    // out[j] = |sum_n x[n] exp(-2 pi i bins[j] n / N)|, N = x.size()
    void (*dft_magnitudes)(std::span<const double> x, std::span<const std::size_t> bins, std::span<double> out);
};

const KernelTable& scalar_table();

/// Null when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool isa_supported(Isa isa);

/// Table used by the library. Defaults to the best supported ISA.
const KernelTable& active();

/// Throws InvalidArgument when the ISA is not supported on this machine.
void select(Isa isa);

}  // namespace chewseg::kernels
