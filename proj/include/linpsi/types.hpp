#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace linpsi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Arm indices (0-based), kept sorted ascending wherever a set is meant.
using ArmSet = std::vector<std::size_t>;

using Count = std::int64_t;

}  // namespace linpsi
