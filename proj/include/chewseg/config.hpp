#pragma once
// One flat `key = value` configuration shared by every command, and the
// run manifest that snapshots it.
//
// Lines starting with '#' and blank lines are ignored. Unknown keys are
// errors, so a misspelling never falls back to a default silently.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chewseg/episodes.hpp"
#include "chewseg/features.hpp"
#include "chewseg/gbtree.hpp"
#include "chewseg/kernels.hpp"
#include "chewseg/periodic.hpp"

namespace chewseg {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Which duration an episode overlap is measured against.
enum class OverlapBase { Truth, Pred, Min };
std::string_view to_string(OverlapBase b);
OverlapBase parse_overlap_base(std::string_view text);

struct PipelineConfig {
    // segmentation
    SweepConfig sweep;
    std::size_t min_len = kDefaultMinLength;
    PeriodicOptions periodic;
    double min_prominence = kDefaultMinProminence;

    // features and training labels
    FeatureOptions features;
    SensorSubset sensors;
    double label_coverage = 0.5;

    // classifier
    BoostConfig boost;
    double threshold = 0.5;

    // episodes and scoring
    DbscanConfig dbscan;
    double delta = kDefaultEpisodeGap;
    double overlap_threshold = 0.5;
    OverlapBase overlap_base = OverlapBase::Truth;

    // model-selection grids for cross-validation (empty = use the value above)
    std::vector<int> grid_max_depth;
    std::vector<double> grid_eta;
    std::vector<double> grid_dbscan_eps;
    std::vector<int> grid_dbscan_min_pts;

    std::uint64_t seed = 42;
    std::string simd = "auto";  // auto | scalar | avx2

    /// Throws InvalidArgument on an out-of-range value.
    void validate() const;

    /// Sets one key; throws on an unknown key or a malformed value.
    void set(std::string_view key, std::string_view value);

    /// Every key with its current value, in a fixed order.
    std::vector<std::pair<std::string, std::string>> entries() const;

    /// Canonical text form (one `key = value` per line); parses back to an
    /// equal configuration.
    std::string to_text() const;
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Pins the kernel ISA named in the config ("auto" picks the best supported).
void apply_simd(const PipelineConfig& cfg);

/// FNV-1a 64 over arbitrary bytes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Snapshot of everything that determines a command's outputs.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> inputs;   // file name -> digest
    std::vector<std::pair<std::string, std::string>> outputs;  // file name -> digest
    std::string tool_version{kToolVersion};

    static RunManifest capture(std::string command, const PipelineConfig& cfg);
    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);

    /// `[command]` header then `key=value` lines.
    std::string to_text() const;
    /// Digest of to_text(), used as the report's manifest hash.
    std::string hash() const;
};

/// Appends a manifest block to `dir/manifest.txt` (atomically rewritten).
void append_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace chewseg
