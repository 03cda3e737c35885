#include "chewseg/feature_ranking.hpp"

#include <algorithm>

#include "chewseg/error.hpp"

namespace chewseg {

std::vector<FeatureImportance> rank_features(const TrainedModel& model) {
    if (model.feature_names.empty()) throw InvalidArgument("model has no feature layout (not trained)");
    std::vector<std::size_t> counts(model.feature_names.size(), 0);
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) ++counts[static_cast<std::size_t>(node.feature)];
        }
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 0) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

    std::vector<FeatureImportance> out;
    out.reserve(order.size());
    for (auto i : order) out.push_back({model.feature_names[i], counts[i]});
    return out;
}

}  // namespace chewseg
