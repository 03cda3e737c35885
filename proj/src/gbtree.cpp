#include "chewseg/gbtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "chewseg/csv.hpp"
#include "chewseg/error.hpp"

namespace chewseg {

void BoostConfig::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
    if (max_depth < 1) throw InvalidArgument("max_depth must be at least 1");
    if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be non-negative");
    if (!(min_child_weight >= 0.0)) throw InvalidArgument("min_child_weight must be non-negative");
    if (!(subsample > 0.0 && subsample <= 1.0)) throw InvalidArgument("subsample must lie in (0, 1]");
    if (n_rounds < 1) throw InvalidArgument("n_rounds must be at least 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
}

double RegressionTree::predict(std::span<const double> x) const {
    if (nodes.empty()) return 0.0;
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    return nodes[i].leaf_weight;
}

int RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

double TrainedModel::margin(std::span<const double> x) const {
    double m = base_score;
    for (const auto& t : trees) m += t.predict(x);
    return m;
}

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

double row_loss(double margin, int y) {
    // log(1 + exp(-m)) for y = 1, log(1 + exp(m)) for y = 0, overflow-safe
    const double z = y == 1 ? -margin : margin;
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double resolve_pos_weight(const std::vector<int>& labels, double requested) {
    if (requested > 0.0) return requested;
    const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const auto neg = static_cast<double>(labels.size()) - pos;
    return neg / pos;
}

void check_data(const TrainingSet& data, std::size_t width) {
    if (data.rows.size() != data.labels.size()) throw InvalidArgument("feature rows and labels differ in count");
    if (data.rows.size() < 2) throw InvalidArgument("training needs at least two rows");
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        if (data.labels[i] == 0) has0 = true;
        else if (data.labels[i] == 1) has1 = true;
        else throw InvalidArgument("label of row " + std::to_string(i) + " is not 0 or 1");
        if (data.rows[i].size() != width) {
            std::ostringstream os;
            os << "row " << i << " has " << data.rows[i].size() << " features, layout has " << width;
            throw InvalidArgument(os.str());
        }
        for (std::size_t j = 0; j < width; ++j) {
            if (!std::isfinite(data.rows[i][j])) {
                std::ostringstream os;
                os << "non-finite feature at row " << i << ", column " << j;
                throw InvalidArgument(os.str());
            }
        }
    }
    if (!(has0 && has1)) throw InvalidArgument("training labels contain a single class");
}

struct Split {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct GrowNode {
    double g = 0.0;
    double h = 0.0;
    int depth = 0;
    Split best;
};

class TreeGrower {
public:
    TreeGrower(const TrainingSet& data, const std::vector<std::vector<std::size_t>>& order, const BoostConfig& cfg)
        : data_(data), order_(order), cfg_(cfg) {}

    RegressionTree grow(const std::vector<double>& grad, const std::vector<double>& hess,
                        const std::vector<char>& sampled) {
        const std::size_t n = data_.rows.size();
        const std::size_t n_features = order_.size();
        std::vector<int> node_of(n, -1);
        std::vector<GrowNode> nodes(1);
        for (std::size_t i = 0; i < n; ++i) {
            if (!sampled[i]) continue;
            node_of[i] = 0;
            nodes[0].g += grad[i];
            nodes[0].h += hess[i];
        }

        RegressionTree tree;
        tree.nodes.resize(1);
        std::vector<int> frontier{0};
        for (int depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
            find_splits(frontier, nodes, node_of, grad, hess, n_features);

            std::vector<int> next;
            std::vector<int> left_of(nodes.size(), -1);
            for (int id : frontier) {
                auto& gn = nodes[static_cast<std::size_t>(id)];
                if (gn.best.feature < 0 || !(gn.best.gain > cfg_.gamma)) continue;
                const int l = static_cast<int>(nodes.size());
                nodes.push_back({0.0, 0.0, depth + 1, {}});
                nodes.push_back({0.0, 0.0, depth + 1, {}});
                tree.nodes.resize(nodes.size());
                auto& tn = tree.nodes[static_cast<std::size_t>(id)];
                tn.feature = nodes[static_cast<std::size_t>(id)].best.feature;
                tn.threshold = nodes[static_cast<std::size_t>(id)].best.threshold;
                tn.left = l;
                tn.right = l + 1;
                left_of[static_cast<std::size_t>(id)] = l;
                next.push_back(l);
                next.push_back(l + 1);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int id = node_of[i];
                if (id < 0 || left_of[static_cast<std::size_t>(id)] < 0) continue;
                const auto& tn = tree.nodes[static_cast<std::size_t>(id)];
                const int child = data_.rows[i][static_cast<std::size_t>(tn.feature)] < tn.threshold ? tn.left : tn.right;
                node_of[i] = child;
                nodes[static_cast<std::size_t>(child)].g += grad[i];
                nodes[static_cast<std::size_t>(child)].h += hess[i];
            }
            frontier = std::move(next);
        }

        for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
            if (!tree.nodes[id].is_leaf()) continue;
            tree.nodes[id].leaf_weight = -cfg_.eta * nodes[id].g / (nodes[id].h + cfg_.lambda);
        }
        return tree;
    }

private:
    double score(double g, double h) const { return g * g / (h + cfg_.lambda); }

    // Exact greedy search over the pre-sorted columns. Features and
    // thresholds are visited in ascending order and only a strictly larger
    // gain replaces the incumbent, so ties go to the lowest feature index,
    // then the lowest threshold.
    void find_splits(const std::vector<int>& frontier, std::vector<GrowNode>& nodes, const std::vector<int>& node_of,
                     const std::vector<double>& grad, const std::vector<double>& hess, std::size_t n_features) {
        struct Acc {
            double g = 0.0;
            double h = 0.0;
            double last = 0.0;
            bool seen = false;
        };
        std::vector<char> active(nodes.size(), 0);
        for (int id : frontier) {
            active[static_cast<std::size_t>(id)] = 1;
            nodes[static_cast<std::size_t>(id)].best = {};
        }
        std::vector<Acc> acc(nodes.size());
        for (std::size_t f = 0; f < n_features; ++f) {
            std::fill(acc.begin(), acc.end(), Acc{});
            for (std::size_t row : order_[f]) {
                const int id = node_of[row];
                if (id < 0 || !active[static_cast<std::size_t>(id)]) continue;
                auto& a = acc[static_cast<std::size_t>(id)];
                auto& gn = nodes[static_cast<std::size_t>(id)];
                const double v = data_.rows[row][f];
                if (a.seen && v > a.last) {
                    const double gl = a.g, hl = a.h;
                    const double gr = gn.g - gl, hr = gn.h - hl;
                    if (hl >= cfg_.min_child_weight && hr >= cfg_.min_child_weight) {
                        const double gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(gn.g, gn.h));
                        if (gain > gn.best.gain) {
                            double thr = a.last + (v - a.last) / 2.0;
                            if (!(thr > a.last)) thr = v;
                            gn.best = {gain, static_cast<int>(f), thr};
                        }
                    }
                }
                a.g += grad[row];
                a.h += hess[row];
                a.last = v;
                a.seen = true;
            }
        }
    }

    const TrainingSet& data_;
    const std::vector<std::vector<std::size_t>>& order_;
    const BoostConfig& cfg_;
};

}  // namespace

TrainedModel train(const TrainingSet& data, const std::vector<std::string>& feature_names, const BoostConfig& cfg) {
    cfg.validate();
    const std::size_t width = feature_names.size();
    check_data(data, width);

    const std::size_t n = data.rows.size();
    const double pos_w = resolve_pos_weight(data.labels, cfg.pos_weight);
    std::vector<double> w(n);
    double wpos = 0.0, wneg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = data.labels[i] == 1 ? pos_w : 1.0;
        (data.labels[i] == 1 ? wpos : wneg) += w[i];
    }

    TrainedModel model;
    model.config = cfg;
    model.config.pos_weight = pos_w;
    model.feature_names = feature_names;
    model.layout_fingerprint = layout_fingerprint(feature_names);
    model.base_score = std::log(wpos / wneg);

    std::vector<std::vector<std::size_t>> order(width);
    for (std::size_t f = 0; f < width; ++f) {
        auto& o = order[f];
        o.resize(n);
        std::iota(o.begin(), o.end(), std::size_t{0});
        std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) { return data.rows[a][f] < data.rows[b][f]; });
    }

    std::vector<double> margin(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<char> sampled(n, 1);
    std::mt19937_64 rng(cfg.seed);
    TreeGrower grower(data, order, cfg);

    for (int round = 0; round < cfg.n_rounds; ++round) {
        if (cfg.subsample < 1.0) {
            for (std::size_t i = 0; i < n; ++i) {
                // 53-bit uniform from the raw engine output keeps the draw
                // identical across standard library implementations
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                sampled[i] = u < cfg.subsample ? 1 : 0;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = w[i] * (p - static_cast<double>(data.labels[i]));
            hess[i] = w[i] * p * (1.0 - p);
        }
        auto tree = grower.grow(grad, hess, sampled);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            margin[i] += tree.predict(data.rows[i]);
            total += w[i] * row_loss(margin[i], data.labels[i]);
        }
        model.training_loss.push_back(total / (wpos + wneg));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

TrainedModel train(const TrainingSet& data, const FeatureLayout& layout, const BoostConfig& cfg) {
    return train(data, layout.names(), cfg);
}

double predict_proba_row(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.feature_names.size()) {
        std::ostringstream os;
        os << "feature vector has " << x.size() << " values, model expects " << model.feature_names.size();
        throw InvalidArgument(os.str());
    }
    return sigmoid(model.margin(x));
}

double predict_proba(const TrainedModel& model, const FeatureVector& x) {
    if (x.layout_fingerprint != model.layout_fingerprint) {
        throw InvalidArgument("feature layout fingerprint does not match the model");
    }
    return predict_proba_row(model, x.values);
}

std::vector<Classification> classify_candidates(const TrainedModel& model,
                                                const std::vector<CandidateSubsequence>& candidates,
                                                const std::vector<FeatureVector>& features, double threshold) {
    if (candidates.size() != features.size()) throw InvalidArgument("candidates and feature vectors differ in count");
    std::vector<Classification> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double p = predict_proba(model, features[i]);
        out.push_back({candidates[i], p >= threshold, p});
    }
    return out;
}

double log_loss(const TrainedModel& model, const TrainingSet& data, double pos_weight) {
    pos_weight = resolve_pos_weight(data.labels, pos_weight);
    double total = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const double w = data.labels[i] == 1 ? pos_weight : 1.0;
        total += w * row_loss(model.margin(data.rows[i]), data.labels[i]);
        wsum += w;
    }
    return total / wsum;
}

namespace {

constexpr std::string_view kMagic = "chewseg-gbtree 1";

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    using csv::format_double;
    const auto& c = model.config;
    std::ostringstream os;
    os << kMagic << '\n';
    os << "layout_fingerprint=" << hex64(model.layout_fingerprint) << '\n';
    os << "base_score=" << format_double(model.base_score) << '\n';
    os << "eta=" << format_double(c.eta) << '\n';
    os << "max_depth=" << c.max_depth << '\n';
    os << "gamma=" << format_double(c.gamma) << '\n';
    os << "min_child_weight=" << format_double(c.min_child_weight) << '\n';
    os << "subsample=" << format_double(c.subsample) << '\n';
    os << "n_rounds=" << c.n_rounds << '\n';
    os << "seed=" << c.seed << '\n';
    os << "lambda=" << format_double(c.lambda) << '\n';
    os << "pos_weight=" << format_double(c.pos_weight) << '\n';
    os << "n_features=" << model.feature_names.size() << '\n';
    for (const auto& f : model.feature_names) os << "feature=" << f << '\n';
    os << "n_trees=" << model.trees.size() << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        os << "tree=" << t << " nodes=" << tree.nodes.size() << '\n';
        os << "id,feature,threshold,left,right,leaf_weight\n";
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const auto& n = tree.nodes[i];
            os << i << ',' << n.feature << ',' << format_double(n.threshold) << ',' << n.left << ',' << n.right << ','
               << format_double(n.leaf_weight) << '\n';
        }
    }
    os << "end\n";
    return os.str();
}

TrainedModel parse_model(std::string_view text) {
    const auto rows = csv::lines(text);
    std::size_t pos = 0;
    auto next = [&]() -> std::string_view {
        if (pos >= rows.size()) throw ParseError("model file ends early at line " + std::to_string(pos + 1));
        return rows[pos++];
    };
    auto value = [&](std::string_view key) -> std::string_view {
        const auto line = next();
        if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != '=') {
            throw ParseError("line " + std::to_string(pos) + ": expected '" + std::string(key) + "='");
        }
        return line.substr(key.size() + 1);
    };

    if (next() != kMagic) throw ParseError("line 1: not a chewseg model file");
    TrainedModel m;
    const auto fp = value("layout_fingerprint");
    m.layout_fingerprint = std::stoull(std::string(fp), nullptr, 16);
    m.base_score = csv::parse_double(value("base_score"), "base_score", pos);
    auto& c = m.config;
    c.eta = csv::parse_double(value("eta"), "eta", pos);
    c.max_depth = static_cast<int>(csv::parse_int(value("max_depth"), "max_depth", pos));
    c.gamma = csv::parse_double(value("gamma"), "gamma", pos);
    c.min_child_weight = csv::parse_double(value("min_child_weight"), "min_child_weight", pos);
    c.subsample = csv::parse_double(value("subsample"), "subsample", pos);
    c.n_rounds = static_cast<int>(csv::parse_int(value("n_rounds"), "n_rounds", pos));
    c.seed = static_cast<std::uint64_t>(csv::parse_int(value("seed"), "seed", pos));
    c.lambda = csv::parse_double(value("lambda"), "lambda", pos);
    c.pos_weight = csv::parse_double(value("pos_weight"), "pos_weight", pos);
    const auto n_features = static_cast<std::size_t>(csv::parse_int(value("n_features"), "n_features", pos));
    for (std::size_t i = 0; i < n_features; ++i) m.feature_names.emplace_back(value("feature"));
    if (layout_fingerprint(m.feature_names) != m.layout_fingerprint) {
        throw ParseError("model feature names do not match its layout fingerprint");
    }
    const auto n_trees = static_cast<std::size_t>(csv::parse_int(value("n_trees"), "n_trees", pos));
    for (std::size_t t = 0; t < n_trees; ++t) {
        const auto head = next();
        const auto sp = head.find(" nodes=");
        if (head.substr(0, 5) != "tree=" || sp == std::string_view::npos) {
            throw ParseError("line " + std::to_string(pos) + ": expected tree header");
        }
        const auto n_nodes = static_cast<std::size_t>(csv::parse_int(head.substr(sp + 7), "nodes", pos));
        if (next() != "id,feature,threshold,left,right,leaf_weight") {
            throw ParseError("line " + std::to_string(pos) + ": expected node table header");
        }
        RegressionTree tree;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const auto f = csv::split(next());
            if (f.size() != 6) throw ParseError("line " + std::to_string(pos) + ": expected 6 node fields");
            TreeNode node;
            if (static_cast<std::size_t>(csv::parse_int(f[0], "id", pos)) != i) {
                throw ParseError("line " + std::to_string(pos) + ": node ids must be consecutive");
            }
            node.feature = static_cast<int>(csv::parse_int(f[1], "feature", pos));
            node.threshold = csv::parse_double(f[2], "threshold", pos);
            node.left = static_cast<int>(csv::parse_int(f[3], "left", pos));
            node.right = static_cast<int>(csv::parse_int(f[4], "right", pos));
            node.leaf_weight = csv::parse_double(f[5], "leaf_weight", pos);
            if (node.feature >= static_cast<int>(n_features)) {
                throw ParseError("line " + std::to_string(pos) + ": split feature out of range");
            }
            if (!node.is_leaf() && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                                    node.left >= static_cast<int>(n_nodes) || node.right >= static_cast<int>(n_nodes))) {
                throw ParseError("line " + std::to_string(pos) + ": child index out of range");
            }
            tree.nodes.push_back(node);
        }
        m.trees.push_back(std::move(tree));
    }
    if (next() != "end") throw ParseError("line " + std::to_string(pos) + ": expected 'end'");
    return m;
}

}  // namespace chewseg
