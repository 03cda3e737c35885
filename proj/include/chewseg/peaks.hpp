#pragma once

#include <span>
#include <string>
#include <vector>

namespace chewseg {

inline constexpr double kDefaultMinProminence = 4.5;

struct Peak {
    std::size_t index = 0;
    double t = 0.0;
    double height = 0.0;
    double prominence = 0.0;
};

/// Indices of strict local maxima. A flat top counts once, at its leftmost
/// sample, when the samples on both sides of the plateau are lower. The
/// first and last samples are never maxima.
std::vector<std::size_t> local_maxima(std::span<const double> signal);

/// Topographic prominence of every sample: height above the higher of the
/// two lowest points reached before meeting strictly higher terrain on each
/// side (the signal ends count as open boundaries). Linear time.
std::vector<double> prominences(std::span<const double> signal);

/// Local maxima whose prominence is at least `min_prominence`, sorted by
/// time. Throws when the arrays differ in length, are shorter than three
/// samples, or min_prominence is not positive.
std::vector<Peak> find_prominent_peaks(std::span<const double> signal, std::span<const double> t,
                                       double min_prominence = kDefaultMinProminence);

/// Number of prominent peaks, without building the peak list.
std::size_t count_prominent_peaks(std::span<const double> signal, double min_prominence);

/// `t_ms,height,prominence`
std::string format_peaks_csv(const std::vector<Peak>& peaks);
std::vector<Peak> parse_peaks_csv(std::string_view text);

}  // namespace chewseg
