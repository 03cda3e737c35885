#include "chewseg/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

std::string_view to_string(OverlapBase b) {
    switch (b) {
        case OverlapBase::Truth: return "truth";
        case OverlapBase::Pred: return "pred";
        case OverlapBase::Min: return "min";
    }
    return "truth";
}

OverlapBase parse_overlap_base(std::string_view text) {
    if (text == "truth") return OverlapBase::Truth;
    if (text == "pred") return OverlapBase::Pred;
    if (text == "min") return OverlapBase::Min;
    throw InvalidArgument("overlap base must be truth, pred or min, got '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

double as_double(std::string_view key, std::string_view v) {
    try {
        return csv::parse_double(v, key, 0);
    } catch (const ParseError&) {
        throw InvalidArgument("config key '" + std::string(key) + "': not a number: '" + std::string(v) + "'");
    }
}

std::int64_t as_int(std::string_view key, std::string_view v) {
    try {
        return csv::parse_int(v, key, 0);
    } catch (const ParseError&) {
        throw InvalidArgument("config key '" + std::string(key) + "': not an integer: '" + std::string(v) + "'");
    }
}

bool as_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("config key '" + std::string(key) + "': expected true/false, got '" + std::string(v) + "'");
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <typename T, typename Parse>
std::vector<T> as_list(std::string_view v, Parse parse) {
    std::vector<T> out;
    if (trim(v).empty()) return out;
    for (auto f : csv::split(v)) out.push_back(static_cast<T>(parse(trim(f))));
    return out;
}

template <typename T, typename Fmt>
std::string fmt_list(const std::vector<T>& xs, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt(xs[i]);
    }
    return out;
}

struct Key {
    std::function<void(PipelineConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

std::string d(double v) { return csv::format_double(v); }

const std::vector<std::pair<std::string, Key>>& keys() {
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> k;
        k.push_back({"sweep.min", {[](auto& c, auto key, auto v) { c.sweep.min = as_double(key, v); },
                                   [](const auto& c) { return d(c.sweep.min); }}});
        k.push_back({"sweep.max", {[](auto& c, auto key, auto v) { c.sweep.max = as_double(key, v); },
                                   [](const auto& c) { return d(c.sweep.max); }}});
        k.push_back({"sweep.epsilon", {[](auto& c, auto key, auto v) { c.sweep.epsilon = as_double(key, v); },
                                       [](const auto& c) { return d(c.sweep.epsilon); }}});
        k.push_back({"segment.min_len",
                     {[](auto& c, auto key, auto v) { c.min_len = static_cast<std::size_t>(as_int(key, v)); },
                      [](const auto& c) { return std::to_string(c.min_len); }}});
        k.push_back({"segment.strict_bounds",
                     {[](auto& c, auto key, auto v) { c.periodic.strict_bounds = as_bool(key, v); },
                      [](const auto& c) { return fmt_bool(c.periodic.strict_bounds); }}});
        k.push_back({"segment.max_optima",
                     {[](auto& c, auto key, auto v) { c.periodic.max_optima = static_cast<std::size_t>(as_int(key, v)); },
                      [](const auto& c) { return std::to_string(c.periodic.max_optima); }}});
        k.push_back({"peaks.min_prominence",
                     {[](auto& c, auto key, auto v) {
                          c.min_prominence = as_double(key, v);
                          c.features.min_prominence = c.min_prominence;
                      },
                      [](const auto& c) { return d(c.min_prominence); }}});
        k.push_back({"features.window_pad",
                     {[](auto& c, auto key, auto v) { c.features.window_pad_s = as_double(key, v); },
                      [](const auto& c) { return d(c.features.window_pad_s); }}});
        k.push_back({"features.sensors", {[](auto& c, auto, auto v) { c.sensors = SensorSubset::parse(v); },
                                          [](const auto& c) { return c.sensors.to_string(); }}});
        k.push_back({"features.label_coverage",
                     {[](auto& c, auto key, auto v) { c.label_coverage = as_double(key, v); },
                      [](const auto& c) { return d(c.label_coverage); }}});
        k.push_back({"boost.eta", {[](auto& c, auto key, auto v) { c.boost.eta = as_double(key, v); },
                                   [](const auto& c) { return d(c.boost.eta); }}});
        k.push_back({"boost.max_depth",
                     {[](auto& c, auto key, auto v) { c.boost.max_depth = static_cast<int>(as_int(key, v)); },
                      [](const auto& c) { return std::to_string(c.boost.max_depth); }}});
        k.push_back({"boost.gamma", {[](auto& c, auto key, auto v) { c.boost.gamma = as_double(key, v); },
                                     [](const auto& c) { return d(c.boost.gamma); }}});
        k.push_back({"boost.min_child_weight",
                     {[](auto& c, auto key, auto v) { c.boost.min_child_weight = as_double(key, v); },
                      [](const auto& c) { return d(c.boost.min_child_weight); }}});
        k.push_back({"boost.subsample", {[](auto& c, auto key, auto v) { c.boost.subsample = as_double(key, v); },
                                         [](const auto& c) { return d(c.boost.subsample); }}});
        k.push_back({"boost.n_rounds",
                     {[](auto& c, auto key, auto v) { c.boost.n_rounds = static_cast<int>(as_int(key, v)); },
                      [](const auto& c) { return std::to_string(c.boost.n_rounds); }}});
        k.push_back({"boost.lambda", {[](auto& c, auto key, auto v) { c.boost.lambda = as_double(key, v); },
                                      [](const auto& c) { return d(c.boost.lambda); }}});
        k.push_back({"boost.pos_weight", {[](auto& c, auto key, auto v) { c.boost.pos_weight = as_double(key, v); },
                                          [](const auto& c) { return d(c.boost.pos_weight); }}});
        k.push_back({"classify.threshold", {[](auto& c, auto key, auto v) { c.threshold = as_double(key, v); },
                                            [](const auto& c) { return d(c.threshold); }}});
        k.push_back({"dbscan.eps", {[](auto& c, auto key, auto v) { c.dbscan.eps = as_double(key, v); },
                                    [](const auto& c) { return d(c.dbscan.eps); }}});
        k.push_back({"dbscan.min_pts",
                     {[](auto& c, auto key, auto v) { c.dbscan.min_pts = static_cast<int>(as_int(key, v)); },
                      [](const auto& c) { return std::to_string(c.dbscan.min_pts); }}});
        k.push_back({"dbscan.use_score_weight",
                     {[](auto& c, auto key, auto v) { c.dbscan.use_score_weight = as_bool(key, v); },
                      [](const auto& c) { return fmt_bool(c.dbscan.use_score_weight); }}});
        k.push_back({"episode.delta", {[](auto& c, auto key, auto v) { c.delta = as_double(key, v); },
                                       [](const auto& c) { return d(c.delta); }}});
        k.push_back({"eval.overlap_threshold",
                     {[](auto& c, auto key, auto v) { c.overlap_threshold = as_double(key, v); },
                      [](const auto& c) { return d(c.overlap_threshold); }}});
        k.push_back({"eval.overlap_base", {[](auto& c, auto, auto v) { c.overlap_base = parse_overlap_base(v); },
                                           [](const auto& c) { return std::string(to_string(c.overlap_base)); }}});
        k.push_back({"grid.max_depth",
                     {[](auto& c, auto key, auto v) {
                          c.grid_max_depth = as_list<int>(v, [&](auto f) { return as_int(key, f); });
                      },
                      [](const auto& c) { return fmt_list(c.grid_max_depth, [](int x) { return std::to_string(x); }); }}});
        k.push_back({"grid.eta",
                     {[](auto& c, auto key, auto v) {
                          c.grid_eta = as_list<double>(v, [&](auto f) { return as_double(key, f); });
                      },
                      [](const auto& c) { return fmt_list(c.grid_eta, d); }}});
        k.push_back({"grid.dbscan_eps",
                     {[](auto& c, auto key, auto v) {
                          c.grid_dbscan_eps = as_list<double>(v, [&](auto f) { return as_double(key, f); });
                      },
                      [](const auto& c) { return fmt_list(c.grid_dbscan_eps, d); }}});
        k.push_back({"grid.dbscan_min_pts",
                     {[](auto& c, auto key, auto v) {
                          c.grid_dbscan_min_pts = as_list<int>(v, [&](auto f) { return as_int(key, f); });
                      },
                      [](const auto& c) {
                          return fmt_list(c.grid_dbscan_min_pts, [](int x) { return std::to_string(x); });
                      }}});
        k.push_back({"seed",
                     {[](auto& c, auto key, auto v) {
                          const auto s = as_int(key, v);
                          if (s < 0) throw InvalidArgument("config key 'seed' must be non-negative");
                          c.seed = static_cast<std::uint64_t>(s);
                          c.boost.seed = c.seed;
                      },
                      [](const auto& c) { return std::to_string(c.seed); }}});
        k.push_back({"simd",
                     {[](auto& c, auto, auto v) {
                          if (v != "auto") (void)kernels::parse_isa(v);
                          c.simd = std::string(v);
                      },
                      [](const auto& c) { return c.simd; }}});
        return k;
    }();
    return table;
}

}  // namespace

void PipelineConfig::validate() const {
    sweep.validate();
    boost.validate();
    dbscan.validate();
    if (min_len < 1) throw InvalidArgument("segment.min_len must be at least 1");
    if (periodic.max_optima < 1) throw InvalidArgument("segment.max_optima must be at least 1");
    if (!(min_prominence > 0.0)) throw InvalidArgument("peaks.min_prominence must be positive");
    if (!(features.window_pad_s >= 0.0)) throw InvalidArgument("features.window_pad must be non-negative");
    if (!(label_coverage > 0.0 && label_coverage <= 1.0)) throw InvalidArgument("features.label_coverage must be in (0, 1]");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("classify.threshold must be in [0, 1]");
    if (!(delta >= 0.0)) throw InvalidArgument("episode.delta must be non-negative");
    if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) {
        throw InvalidArgument("eval.overlap_threshold must be in [0, 1]");
    }
    for (int v : grid_max_depth) {
        if (v < 1) throw InvalidArgument("grid.max_depth values must be at least 1");
    }
    for (double v : grid_eta) {
        if (!(v > 0.0 && v <= 1.0)) throw InvalidArgument("grid.eta values must be in (0, 1]");
    }
    for (double v : grid_dbscan_eps) {
        if (!(v > 0.0)) throw InvalidArgument("grid.dbscan_eps values must be positive");
    }
    for (int v : grid_dbscan_min_pts) {
        if (v < 1) throw InvalidArgument("grid.dbscan_min_pts values must be at least 1");
    }
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    for (const auto& [name, k] : keys()) {
        if (name == key) {
            k.set(*this, key, value);
            return;
        }
    }
    throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [name, k] : keys()) out.emplace_back(name, k.get(*this));
    return out;
}

std::string PipelineConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries()) out += k + " = " + v + '\n';
    return out;
}

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    const auto rows = csv::lines(text);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto line = trim(rows[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("config line " + std::to_string(i + 1) + ": expected 'key = value'");
        }
        try {
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("config line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(csv::read_file(path)); }

void apply_simd(const PipelineConfig& cfg) {
    if (cfg.simd == "auto") {
        kernels::select(kernels::isa_supported(kernels::Isa::Avx2) ? kernels::Isa::Avx2 : kernels::Isa::Scalar);
    } else {
        kernels::select(kernels::parse_isa(cfg.simd));
    }
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

RunManifest RunManifest::capture(std::string command, const PipelineConfig& cfg) {
    RunManifest m;
    m.command = std::move(command);
    m.config = cfg.entries();
    return m;
}

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs.emplace_back(path.filename().string(), hex64(fnv1a64(csv::read_file(path))));
}

void RunManifest::add_output(const std::filesystem::path& path) {
    outputs.emplace_back(path.filename().string(), hex64(fnv1a64(csv::read_file(path))));
}

std::string RunManifest::to_text() const {
    std::string out = "[" + command + "]\n";
    out += "tool_version=" + tool_version + '\n';
    for (const auto& [k, v] : config) out += "config." + k + '=' + v + '\n';
    for (const auto& [k, v] : inputs) out += "input." + k + '=' + v + '\n';
    for (const auto& [k, v] : outputs) out += "output." + k + '=' + v + '\n';
    return out;
}

std::string RunManifest::hash() const { return hex64(fnv1a64(to_text())); }

void append_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    const auto path = dir / "manifest.txt";
    std::string text;
    if (std::filesystem::exists(path)) text = csv::read_file(path);
    text += m.to_text();
    csv::write_file_atomic(path, text);
}

}  // namespace chewseg
