#include "chewseg/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

std::vector<std::size_t> local_maxima(std::span<const double> x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i - 1] < x[i]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i]) ++j;
            if (j + 1 < n && x[j + 1] < x[i]) out.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }
    return out;
}

namespace {

// For every sample, the minimum over the stretch that ends at the nearest
// strictly higher sample in the walk direction (or at the signal end).
// Stack entries carry the minimum of the run they absorbed, so each sample
// is pushed and popped once.
template <typename IndexRange>
std::vector<double> base_minima(std::span<const double> x, IndexRange order) {
    std::vector<double> base(x.size());
    struct Entry {
        double value;
        double run_min;
    };
    std::vector<Entry> stack;
    for (std::size_t i : order) {
        double run_min = x[i];
        while (!stack.empty() && stack.back().value <= x[i]) {
            run_min = std::min(run_min, stack.back().run_min);
            stack.pop_back();
        }
        base[i] = run_min;
        stack.push_back({x[i], run_min});
    }
    return base;
}

struct Forward {
    std::size_t n;
    struct It {
        std::size_t i;
        std::size_t operator*() const { return i; }
        It& operator++() { ++i; return *this; }
        bool operator!=(const It& o) const { return i != o.i; }
    };
    It begin() const { return {0}; }
    It end() const { return {n}; }
};

struct Backward {
    std::size_t n;
    struct It {
        std::size_t i;
        std::size_t operator*() const { return i - 1; }
        It& operator++() { --i; return *this; }
        bool operator!=(const It& o) const { return i != o.i; }
    };
    It begin() const { return {n}; }
    It end() const { return {0}; }
};

}  // namespace

std::vector<double> prominences(std::span<const double> x) {
    const auto left = base_minima(x, Forward{x.size()});
    const auto right = base_minima(x, Backward{x.size()});
    std::vector<double> prom(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prom[i] = x[i] - std::max(left[i], right[i]);
    return prom;
}

std::vector<Peak> find_prominent_peaks(std::span<const double> signal, std::span<const double> t,
                                       double min_prominence) {
    if (signal.size() != t.size()) {
        std::ostringstream os;
        os << "signal has " << signal.size() << " samples but time axis has " << t.size();
        throw InvalidArgument(os.str());
    }
    if (signal.size() < 3) throw InvalidArgument("peak detection needs at least 3 samples");
    if (!(min_prominence > 0.0)) throw InvalidArgument("min_prominence must be positive");

    const auto prom = prominences(signal);
    std::vector<Peak> out;
    for (std::size_t i : local_maxima(signal)) {
        if (prom[i] >= min_prominence) out.push_back({i, t[i], signal[i], prom[i]});
    }
    return out;
}

std::size_t count_prominent_peaks(std::span<const double> signal, double min_prominence) {
    if (signal.size() < 3) return 0;
    const auto prom = prominences(signal);
    std::size_t count = 0;
    for (std::size_t i : local_maxima(signal)) {
        if (prom[i] >= min_prominence) ++count;
    }
    return count;
}

std::string format_peaks_csv(const std::vector<Peak>& peaks) {
    std::string out = "t_ms,height,prominence\n";
    for (const auto& p : peaks) {
        out += std::to_string(std::llround(p.t * 1000.0));
        out += ',';
        out += csv::format_double(p.height);
        out += ',';
        out += csv::format_double(p.prominence);
        out += '\n';
    }
    return out;
}

std::vector<Peak> parse_peaks_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || rows.front() != "t_ms,height,prominence") {
        throw ParseError("line 1: peak CSV header must be 't_ms,height,prominence'");
    }
    std::vector<Peak> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].empty()) continue;
        const auto f = csv::split(rows[i]);
        if (f.size() != 3) throw ParseError("line " + std::to_string(i + 1) + ": expected 3 fields");
        Peak p;
        p.index = out.size();
        p.t = static_cast<double>(csv::parse_int(f[0], "t_ms", i + 1)) / 1000.0;
        p.height = csv::parse_double(f[1], "height", i + 1);
        p.prominence = csv::parse_double(f[2], "prominence", i + 1);
        out.push_back(p);
    }
    return out;
}

}  // namespace chewseg
