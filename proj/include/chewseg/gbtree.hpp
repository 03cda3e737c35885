#pragma once

// Second-order gradient boosting of regression trees on the logistic loss
// (binary chewing vs. other).
//
// Each round fits one tree to per-row gradient g = w (p - y) and hessian
// h = w p (1 - p). A split is kept when
//     gain = 1/2 [ GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda) ] > gamma
// and both children carry a hessian sum of at least min_child_weight.
// Leaves hold -eta * G / (H + lambda).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chewseg/features.hpp"

namespace chewseg {

struct BoostConfig {
    double eta = 0.3;
    int max_depth = 4;
    double gamma = 0.0;
    double min_child_weight = 1.0;
    double subsample = 0.8;
    int n_rounds = 200;
    std::uint64_t seed = 42;
    double lambda = 1.0;
    /// Weight of positive rows; <= 0 means (negatives / positives).
    double pos_weight = -1.0;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;  // rows with x < threshold go left
    int left = -1;
    int right = -1;
    double leaf_weight = 0.0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    int depth() const;
};

struct TrainedModel {
    std::vector<RegressionTree> trees;
    double base_score = 0.0;  // margin added before the sigmoid
    BoostConfig config;
    std::vector<std::string> feature_names;
    std::uint64_t layout_fingerprint = 0;
    std::vector<double> training_loss;  // weighted mean log-loss after each round

    double margin(std::span<const double> x) const;
};

/// Feature matrix in row-major order.
struct TrainingSet {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;  // 0 or 1
};

/// Throws on fewer than two rows, a single class, or a non-finite value.
TrainedModel train(const TrainingSet& data, const FeatureLayout& layout, const BoostConfig& cfg);

/// Same, for callers that carry an explicit name list.
TrainedModel train(const TrainingSet& data, const std::vector<std::string>& feature_names, const BoostConfig& cfg);

/// Throws when the vector's layout fingerprint does not match the model.
double predict_proba(const TrainedModel& model, const FeatureVector& x);

/// Unchecked variant for raw rows of the model's own layout.
double predict_proba_row(const TrainedModel& model, std::span<const double> x);

struct Classification {
    CandidateSubsequence candidate;
    bool positive = false;
    double probability = 0.0;
};

/// Positive when probability >= threshold.
std::vector<Classification> classify_candidates(const TrainedModel& model,
                                                const std::vector<CandidateSubsequence>& candidates,
                                                const std::vector<FeatureVector>& features, double threshold = 0.5);

/// Flat text format: header lines `key=value`, then one block per tree
/// with node rows `id,feature,threshold,left,right,leaf_weight`.
std::string serialize_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);

/// Mean weighted log-loss of the model on a data set; pos_weight <= 0
/// means (negatives / positives), as in training.
double log_loss(const TrainedModel& model, const TrainingSet& data, double pos_weight);

}  // namespace chewseg
