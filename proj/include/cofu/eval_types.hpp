#pragma once

// Ground-truth containers shared by the data generator and the evaluation
// metrics.

#include <cofu/types.hpp>

namespace cofu {

using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// What a perfect method would recover: which coefficients are nonzero
/// (p x K) and which community blocks are identical between adjacent
/// datasets (L x (K-1), true = identical).
struct IdentificationTruth {
  BoolGrid effects;
  BoolGrid commonality;
};

}  // namespace cofu
