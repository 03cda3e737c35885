#include <atomic>
#include <string>

#include "chewseg/error.hpp"
#include "chewseg/kernels.hpp"

namespace chewseg::kernels {

#ifndef CHEWSEG_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa parse_isa(std::string_view text) {
    if (text == "scalar") return Isa::Scalar;
    if (text == "avx2") return Isa::Avx2;
    throw InvalidArgument("unknown kernel ISA '" + std::string(text) + "' (expected scalar or avx2)");
}

bool isa_supported(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(CHEWSEG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool cpu_ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return cpu_ok && avx2_table() != nullptr;
#else
    return false;
#endif
}

namespace {

const KernelTable* best_table() {
    if (isa_supported(Isa::Avx2)) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{best_table()};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void select(Isa isa) {
    if (!isa_supported(isa)) {
        throw InvalidArgument("kernel ISA '" + std::string(to_string(isa)) + "' is not supported on this machine");
    }
    current().store(isa == Isa::Avx2 ? avx2_table() : &scalar_table(), std::memory_order_release);
}

}  // namespace chewseg::kernels
