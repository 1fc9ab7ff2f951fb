#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "setonet/datagen/dataset.hpp"

namespace setonet {

// Sample i of a split is drawn from Rng::stream(seed ^ split_hash(split), i),
// so generation order does not matter.
std::uint64_t split_hash(const std::string& split);

using ProgressFn = std::function<void(Eigen::Index done, Eigen::Index total)>;

// Generates n samples of `card` (any kind except elastic, which is loaded).
OperatorDataset generate_dataset(const BenchmarkCard& card, const std::string& split, Eigen::Index n,
                                 std::uint64_t seed, const ProgressFn& progress = {});

}  // namespace setonet
