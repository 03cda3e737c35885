// chewseg: command-line driver for the eating-detection pipeline.
//
// Every stage reads the artifacts of the previous one from --out and
// writes its own next to them:
//
//   synth      -> <p>.sensor.csv, labels.csv, <p>.scenario.txt
//   ingest     -> sessions.csv, <p>.frames.csv, <p>.labels.csv
//   derive     -> <p>.derived.csv
//   peaks      -> <p>.peaks.csv
//   segment    -> <p>.candidates.csv
//   featurize  -> <p>.features.csv
//   train      -> model.txt, ranking.csv
//   predict    -> <p>.predictions.csv
//   episodes   -> <p>.seconds.csv, <p>.episodes.csv
//   evaluate   -> report.csv, report.txt
//   losocv     -> report.csv, report.txt, folds.csv
//   ablate     -> ablation.csv, ablation.txt
//   gap-cdf    -> gap_cdf.csv
//
// Each command also appends a block to manifest.txt.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chewseg/config.hpp"
#include "chewseg/csv.hpp"
#include "chewseg/data_model.hpp"
#include "chewseg/derived_signals.hpp"
#include "chewseg/error.hpp"
#include "chewseg/evaluation.hpp"
#include "chewseg/feature_ranking.hpp"
#include "chewseg/features.hpp"
#include "chewseg/gbtree.hpp"
#include "chewseg/peaks.hpp"
#include "chewseg/periodic.hpp"
#include "chewseg/pipeline.hpp"
#include "chewseg/synth.hpp"

namespace fs = std::filesystem;
using namespace chewseg;

namespace {

struct Options {
    std::string config_path;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::string participants;
    std::string sensors;
    std::optional<double> threshold;
    std::optional<double> delta;

    // command specific
    std::string input;
    std::string preset = "clean";
    std::string scenario;
    int count = 1;
    std::string labels;
};

class Workspace {
public:
    Workspace(const Options& opt, std::string command) : opt_(opt), dir_(opt.out), command_(std::move(command)) {
        if (!opt.config_path.empty()) cfg_ = load_config(opt.config_path);
        if (opt.seed) cfg_.set("seed", std::to_string(*opt.seed));
        if (!opt.sensors.empty()) cfg_.set("features.sensors", opt.sensors);
        if (opt.threshold) cfg_.set("classify.threshold", csv::format_double(*opt.threshold));
        if (opt.delta) cfg_.set("episode.delta", csv::format_double(*opt.delta));
        cfg_.validate();
        apply_simd(cfg_);
        manifest_ = RunManifest::capture(command_, cfg_);
        if (!opt.config_path.empty()) manifest_.add_input(opt.config_path);
        fs::create_directories(dir_);
    }

    const PipelineConfig& cfg() const { return cfg_; }
    const fs::path& dir() const { return dir_; }

    fs::path artifact(const std::string& participant, const std::string& kind) const {
        return dir_ / (participant + "." + kind + ".csv");
    }

    /// Reads an upstream artifact; a missing file names the command that makes it.
    std::string read(const fs::path& path, const std::string& producer) {
        if (!fs::exists(path)) {
            throw Error("missing " + path.string() + ": run '" + producer + "' first");
        }
        manifest_.add_input(path);
        return csv::read_file(path);
    }

    /// Reads a user-supplied input file.
    std::string read_input(const fs::path& path) {
        if (!fs::exists(path)) throw Error("input file " + path.string() + " does not exist");
        manifest_.add_input(path);
        return csv::read_file(path);
    }

    void write(const fs::path& path, const std::string& text) {
        csv::write_file_atomic(path, text);
        manifest_.add_output(path);
    }

    /// Participants recorded by `ingest`, narrowed by --participants.
    std::vector<SessionMetadata> sessions() {
        const auto text = read(dir_ / "sessions.csv", "ingest");
        std::vector<SessionMetadata> all;
        const auto rows = csv::lines(text);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].empty()) continue;
            const auto f = csv::split(rows[i]);
            if (f.size() < 4) throw ParseError("sessions.csv line " + std::to_string(i + 1) + ": expected 4+ fields");
            SessionMetadata m;
            m.participant = std::string(f[0]);
            m.study_arm = std::string(f[1]);
            m.day_index = static_cast<int>(csv::parse_int(f[2], "day_index", i + 1));
            m.utc_offset_s = csv::parse_int(f[3], "utc_offset_s", i + 1);
            all.push_back(std::move(m));
        }
        return filter(all, [](const auto& m) { return m.participant; });
    }

    template <typename T, typename Name>
    std::vector<T> filter(const std::vector<T>& items, Name name) const {
        if (opt_.participants.empty()) return items;
        std::vector<T> out;
        for (auto want : csv::split(opt_.participants)) {
            const auto it = std::find_if(items.begin(), items.end(), [&](const auto& x) { return name(x) == want; });
            if (it == items.end()) throw InvalidArgument("unknown participant '" + std::string(want) + "'");
            out.push_back(*it);
        }
        return out;
    }

    /// Loads an ingested session with its labels attached.
    Session load_session(const SessionMetadata& meta) {
        Session s = parse_sensor_csv(read(artifact(meta.participant, "frames"), "ingest"));
        s.meta = meta;
        attach_labels(s, parse_label_csv(read(artifact(meta.participant, "labels"), "ingest")));
        return s;
    }

    void finish() { append_manifest(dir_, manifest_); }

private:
    const Options& opt_;
    fs::path dir_;
    std::string command_;
    PipelineConfig cfg_;
    RunManifest manifest_;
};

// ---------------------------------------------------------------- commands

void cmd_synth(const Options& opt) {
    Workspace ws(opt, "synth");
    const auto base_seed = ws.cfg().seed;
    std::vector<std::string> names;
    if (!opt.participants.empty()) {
        for (auto p : csv::split(opt.participants)) names.emplace_back(p);
    } else {
        if (opt.count < 1) throw InvalidArgument("--count must be at least 1");
        for (int i = 0; i < opt.count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "p%02d", i + 1);
            names.emplace_back(buf);
        }
    }
    std::vector<LabeledInterval> labels;
    for (std::size_t i = 0; i < names.size(); ++i) {
        ScenarioSpec spec;
        if (!opt.scenario.empty()) {
            spec = ScenarioSpec::parse(ws.read_input(opt.scenario));
            spec.participant = names[i];
            spec.seed = base_seed + i;
        } else {
            spec = preset(opt.preset, base_seed + i, names[i]);
        }
        const auto rec = generate(spec);
        ws.write(ws.dir() / (names[i] + ".sensor.csv"), format_sensor_csv(rec.session.frames));
        ws.write(ws.dir() / (names[i] + ".scenario.txt"), spec.to_text());
        labels.insert(labels.end(), rec.labels.begin(), rec.labels.end());
    }
    ws.write(ws.dir() / "labels.csv", format_label_csv(labels));
    ws.finish();
}

void cmd_ingest(const Options& opt) {
    Workspace ws(opt, "ingest");
    const fs::path in = opt.input.empty() ? ws.dir() : fs::path(opt.input);
    if (!fs::is_directory(in)) throw Error("input directory " + in.string() + " does not exist");

    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(in)) {
        const auto name = e.path().filename().string();
        const std::string suffix = ".sensor.csv";
        if (name.size() > suffix.size() && name.ends_with(suffix)) found.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(found.begin(), found.end());
    const auto participants = ws.filter(found, [](const std::string& s) { return s; });
    if (participants.empty()) throw Error("no <participant>.sensor.csv files in " + in.string());

    std::map<std::string, SessionMetadata> meta;
    if (fs::exists(in / "participants.csv")) {
        const auto rows = csv::lines(ws.read_input(in / "participants.csv"));
        if (rows.empty() || rows.front() != "participant,study_arm,day_index,utc_offset_s") {
            throw ParseError("participants.csv: header must be 'participant,study_arm,day_index,utc_offset_s'");
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].empty()) continue;
            const auto f = csv::split(rows[i]);
            if (f.size() != 4) throw ParseError("participants.csv line " + std::to_string(i + 1) + ": expected 4 fields");
            SessionMetadata m{std::string(f[0]), std::string(f[1]), static_cast<int>(csv::parse_int(f[2], "day_index", i + 1)),
                              csv::parse_int(f[3], "utc_offset_s", i + 1)};
            meta[m.participant] = m;
        }
    }

    const auto labels = parse_label_csv(ws.read_input(in / "labels.csv"));
    std::string sessions = "participant,study_arm,day_index,utc_offset_s,frames,gaps,max_gap_s,rejected_rows\n";
    for (const auto& p : participants) {
        const auto path = in / (p + ".sensor.csv");
        Session s;
        try {
            s = parse_sensor_csv(ws.read_input(path));
        } catch (const ParseError& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
        s.meta = meta.count(p) ? meta[p] : SessionMetadata{p, "", 0, 0};
        attach_labels(s, labels);
        ws.write(ws.artifact(p, "frames"), format_sensor_csv(s.frames));
        ws.write(ws.artifact(p, "labels"), format_label_csv(s.labels));
        sessions += p + ',' + s.meta.study_arm + ',' + std::to_string(s.meta.day_index) + ',' +
                    std::to_string(s.meta.utc_offset_s) + ',' + std::to_string(s.frames.size()) + ',' +
                    std::to_string(s.gaps.count) + ',' + csv::format_double(s.gaps.max_gap) + ',' +
                    std::to_string(s.gaps.rejected_rows) + '\n';
    }
    ws.write(ws.dir() / "sessions.csv", sessions);
    ws.finish();
}

void cmd_derive(const Options& opt) {
    Workspace ws(opt, "derive");
    for (const auto& m : ws.sessions()) {
        const auto s = ws.load_session(m);
        ws.write(ws.artifact(m.participant, "derived"), format_derived_csv(derive(s)));
    }
    ws.finish();
}

void cmd_peaks(const Options& opt) {
    Workspace ws(opt, "peaks");
    for (const auto& m : ws.sessions()) {
        const auto trace = parse_derived_csv(ws.read(ws.artifact(m.participant, "derived"), "derive"));
        const auto peaks = find_prominent_peaks(trace.prox, trace.t, ws.cfg().min_prominence);
        ws.write(ws.artifact(m.participant, "peaks"), format_peaks_csv(peaks));
    }
    ws.finish();
}

void cmd_segment(const Options& opt) {
    Workspace ws(opt, "segment");
    const auto& cfg = ws.cfg();
    for (const auto& m : ws.sessions()) {
        const auto peaks = parse_peaks_csv(ws.read(ws.artifact(m.participant, "peaks"), "peaks"));
        ws.write(ws.artifact(m.participant, "candidates"),
                 format_candidates_csv(segment(peaks, cfg.sweep, cfg.min_len, cfg.periodic)));
    }
    ws.finish();
}

void cmd_featurize(const Options& opt) {
    Workspace ws(opt, "featurize");
    const auto& cfg = ws.cfg();
    const FeatureLayout layout(cfg.sensors);
    for (const auto& m : ws.sessions()) {
        const auto trace = parse_derived_csv(ws.read(ws.artifact(m.participant, "derived"), "derive"));
        const auto cands = parse_candidates_csv(ws.read(ws.artifact(m.participant, "candidates"), "segment"));
        const auto labels = parse_label_csv(ws.read(ws.artifact(m.participant, "labels"), "ingest"));
        std::vector<TimeInterval> chew;
        for (const auto& l : labels_of_kind(labels, IntervalKind::ChewingSequence)) chew.push_back(l.span());

        FeatureMatrix fm;
        fm.names = layout.names();
        const LocalClock clock{m.utc_offset_s};
        for (const auto& c : cands) {
            auto fv = extract(trace, c, clock, layout, cfg.features);
            fm.rows.push_back({std::move(fv.values), c.c1, c.c2, m.participant, label_candidate(c, chew, cfg.label_coverage)});
        }
        ws.write(ws.artifact(m.participant, "features"), format_feature_csv(fm));
    }
    ws.finish();
}

FeatureMatrix read_features(Workspace& ws, const SessionMetadata& m) {
    return parse_feature_csv(ws.read(ws.artifact(m.participant, "features"), "featurize"));
}

void cmd_train(const Options& opt) {
    Workspace ws(opt, "train");
    TrainingSet ts;
    std::vector<std::string> names;
    for (const auto& m : ws.sessions()) {
        auto fm = read_features(ws, m);
        if (names.empty()) names = fm.names;
        if (fm.names != names) throw InvalidArgument("feature layouts differ between participants; rerun 'featurize'");
        for (auto& r : fm.rows) {
            if (r.label < 0) throw InvalidArgument("unlabelled candidate for " + m.participant + "; training needs labels");
            ts.rows.push_back(std::move(r.values));
            ts.labels.push_back(r.label);
        }
    }
    if (names.empty()) throw InvalidArgument("no participants to train on");
    const auto model = train(ts, names, ws.cfg().boost);
    ws.write(ws.dir() / "model.txt", serialize_model(model));
    std::string ranking = "feature,splits\n";
    for (const auto& f : rank_features(model)) ranking += f.name + ',' + std::to_string(f.splits) + '\n';
    ws.write(ws.dir() / "ranking.csv", ranking);
    ws.finish();
}

void cmd_predict(const Options& opt) {
    Workspace ws(opt, "predict");
    const auto model = parse_model(ws.read(ws.dir() / "model.txt", "train"));
    for (const auto& m : ws.sessions()) {
        const auto fm = read_features(ws, m);
        const auto cands = parse_candidates_csv(ws.read(ws.artifact(m.participant, "candidates"), "segment"));
        if (fm.rows.size() != cands.size()) {
            throw InvalidArgument("features and candidates disagree for " + m.participant + "; rerun 'featurize'");
        }
        if (layout_fingerprint(fm.names) != model.layout_fingerprint) {
            throw InvalidArgument("feature layout of " + m.participant + " does not match the model");
        }
        std::vector<Classification> out;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const double p = predict_proba_row(model, fm.rows[i].values);
            out.push_back({cands[i], p >= ws.cfg().threshold, p});
        }
        ws.write(ws.artifact(m.participant, "predictions"), format_predictions_csv(out));
    }
    ws.finish();
}

void cmd_episodes(const Options& opt) {
    Workspace ws(opt, "episodes");
    for (const auto& m : ws.sessions()) {
        auto classified = parse_predictions_csv(ws.read(ws.artifact(m.participant, "predictions"), "predict"));
        const auto p = finish_prediction(std::move(classified), ws.cfg().dbscan, ws.cfg().delta);
        std::vector<SecondScore> kept;
        for (const auto& s : p.scores) {
            if (p.seconds.count(s.second)) kept.push_back(s);
        }
        ws.write(ws.artifact(m.participant, "seconds"), format_seconds_csv(kept));
        ws.write(ws.artifact(m.participant, "episodes"), format_episodes_csv(m.participant, p.episodes));
    }
    ws.finish();
}

void write_report(Workspace& ws, const EvalReport& r, const std::string& stem) {
    ws.write(ws.dir() / (stem + ".csv"), r.format_csv());
    ws.write(ws.dir() / (stem + ".txt"), r.format_table());
    std::cout << r.format_table();
}

void cmd_evaluate(const Options& opt) {
    Workspace ws(opt, "evaluate");
    const auto& cfg = ws.cfg();
    EvalReport report;
    for (const auto& m : ws.sessions()) {
        const auto pred_path = ws.artifact(m.participant, "predictions");
        if (!fs::exists(pred_path)) throw Error("missing " + pred_path.string() + ": run 'predict' first");
        const auto seconds = parse_seconds_csv(ws.read(ws.artifact(m.participant, "seconds"), "episodes"));
        const auto episodes = parse_episodes_csv(ws.read(ws.artifact(m.participant, "episodes"), "episodes"));
        const auto labels = parse_label_csv(ws.read(ws.artifact(m.participant, "labels"), "ingest"));
        const auto n_cands = parse_predictions_csv(ws.read(pred_path, "predict")).size();

        ProcessedSession truth;
        truth.participant = m.participant;
        for (const auto& l : labels_of_kind(labels, IntervalKind::ChewingSequence)) truth.chew_truth.push_back(l.span());
        const auto ep = labels_of_kind(labels, IntervalKind::EatingEpisode);
        const auto ep_src = ep.empty() ? derive_episode_labels(labels_of_kind(labels, IntervalKind::ChewingSequence), cfg.delta) : ep;
        for (const auto& l : ep_src) truth.episode_truth.push_back(l.span());

        SessionPrediction p;
        for (const auto& s : seconds) p.seconds.insert(s.second);
        for (const auto& e : episodes) p.episodes.push_back(e.episode);
        auto r = score_participant(truth, p, cfg);
        r.n_candidates = n_cands;
        r.flagged = n_cands == 0;
        report.participants.push_back(std::move(r));
    }
    summarize(report);
    report.manifest_hash = RunManifest::capture("evaluate", cfg).hash();
    write_report(ws, report, "report");
    ws.finish();
}

std::vector<Session> load_sessions(Workspace& ws) {
    std::vector<Session> out;
    for (const auto& m : ws.sessions()) out.push_back(ws.load_session(m));
    return out;
}

void cmd_losocv(const Options& opt) {
    Workspace ws(opt, "losocv");
    const auto report = losocv(load_sessions(ws), ws.cfg());
    write_report(ws, report, "report");
    std::string folds = "participant,model_hash,selection\n";
    for (const auto& r : report.participants) folds += r.participant + ',' + r.model_hash + ',' + r.selection + '\n';
    ws.write(ws.dir() / "folds.csv", folds);
    ws.finish();
}

void cmd_ablate(const Options& opt) {
    Workspace ws(opt, "ablate");
    if (opt.sensors.empty()) throw InvalidArgument("ablate needs --sensors (e.g. --sensors prox)");
    const auto sessions = load_sessions(ws);
    const auto full = losocv(sessions, [&] {
        auto c = ws.cfg();
        c.sensors = SensorSubset::all();
        return c;
    }());
    const auto part = ablate_sensors(sessions, ws.cfg(), ws.cfg().sensors);

    std::string out = "sensors,level,precision,recall,f1\n";
    auto row = [&](const std::string& s, const char* level, const Metrics& m) {
        out += s + ',' + level + ',' + csv::format_fixed(m.precision, 6) + ',' + csv::format_fixed(m.recall, 6) + ',' +
               csv::format_fixed(m.f1, 6) + '\n';
    };
    // the subset names are comma lists; join with '+' inside the CSV
    auto plus = [](std::string s) {
        std::replace(s.begin(), s.end(), ',', '+');
        return s;
    };
    const auto full_name = plus(SensorSubset::all().to_string());
    const auto part_name = plus(ws.cfg().sensors.to_string());
    row(full_name, "second", full.mean_second);
    row(full_name, "episode", full.mean_episode);
    row(part_name, "second", part.mean_second);
    row(part_name, "episode", part.mean_episode);
    ws.write(ws.dir() / "ablation.csv", out);
    const auto text = "== " + full_name + " ==\n" + full.format_table() + "== " + part_name + " ==\n" + part.format_table();
    ws.write(ws.dir() / "ablation.txt", text);
    std::cout << text;
    ws.finish();
}

void cmd_gap_cdf(const Options& opt) {
    Workspace ws(opt, "gap-cdf");
    std::vector<LabeledInterval> chews;
    if (!opt.labels.empty()) {
        chews = labels_of_kind(parse_label_csv(ws.read_input(opt.labels)), IntervalKind::ChewingSequence);
    } else {
        for (const auto& m : ws.sessions()) {
            auto l = labels_of_kind(parse_label_csv(ws.read(ws.artifact(m.participant, "labels"), "ingest")),
                                    IntervalKind::ChewingSequence);
            chews.insert(chews.end(), l.begin(), l.end());
        }
    }
    ws.write(ws.dir() / "gap_cdf.csv", format_cdf_csv(pooled_gap_cdf(chews)));
    ws.finish();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chewseg: eating detection from necklace sensor logs"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config_path, "flat key = value config file")->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "working directory for artifacts");
    app.add_option("--seed", opt.seed, "seed (overrides config)");
    app.add_option("--participants", opt.participants, "comma-separated participant subset");
    app.add_option("--sensors", opt.sensors, "comma-separated sensor subset (prox, ambient, lfa, energy, imu, all)");
    app.add_option("--threshold", opt.threshold, "classification probability threshold");
    app.add_option("--delta", opt.delta, "episode gap threshold, seconds");

    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--preset", opt.preset, "clean, medium, dark, empty, walking, talking");
    synth->add_option("--scenario", opt.scenario, "scenario file (overrides --preset)");
    synth->add_option("--count", opt.count, "number of participants when --participants is not given");
    auto* ingest = app.add_subcommand("ingest", "validate a corpus and copy it into the working directory");
    ingest->add_option("--input", opt.input, "corpus directory (<p>.sensor.csv + labels.csv)");
    app.add_subcommand("derive", "compute LFA and energy signals");
    app.add_subcommand("peaks", "detect prominent proximity peaks");
    app.add_subcommand("segment", "find periodic candidate subsequences");
    app.add_subcommand("featurize", "extract candidate feature vectors");
    app.add_subcommand("train", "train the boosted-tree classifier");
    app.add_subcommand("predict", "classify candidates");
    app.add_subcommand("episodes", "score seconds, cluster and form episodes");
    app.add_subcommand("evaluate", "score predicted episodes against labels");
    app.add_subcommand("losocv", "leave-one-subject-out cross-validation");
    app.add_subcommand("ablate", "cross-validation with a restricted sensor set vs all sensors");
    auto* gap = app.add_subcommand("gap-cdf", "CDF of gaps between chewing sequences");
    gap->add_option("--labels", opt.labels, "label CSV (default: ingested labels)");

    CLI11_PARSE(app, argc, argv);

    const std::map<std::string, void (*)(const Options&)> commands{
        {"synth", cmd_synth},       {"ingest", cmd_ingest},     {"derive", cmd_derive},   {"peaks", cmd_peaks},
        {"segment", cmd_segment},   {"featurize", cmd_featurize}, {"train", cmd_train},   {"predict", cmd_predict},
        {"episodes", cmd_episodes}, {"evaluate", cmd_evaluate}, {"losocv", cmd_losocv},   {"ablate", cmd_ablate},
        {"gap-cdf", cmd_gap_cdf}};
    try {
        commands.at(app.get_subcommands().front()->get_name())(opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
