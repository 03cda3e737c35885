#pragma once

#include <string>
#include <vector>

#include "chewseg/gbtree.hpp"

namespace chewseg {

struct FeatureImportance {
    std::string name;
    std::size_t splits = 0;
};

/// Features ordered by how many splits use them across all trees (most
/// first, ties by layout position). Features never split on are omitted.
/// Throws when the model carries no feature layout.
std::vector<FeatureImportance> rank_features(const TrainedModel& model);

}  // namespace chewseg
