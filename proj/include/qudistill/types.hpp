#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace qudistill {

// Integer vectors/matrices holding canonical residues in [0, modulus).
using IVec = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Thrown when an enumeration or allocation would exceed an explicit cap.
class resource_limit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an internal numerical-consistency check fails: tolerance
// violations, impossible measurement outcomes, eigensolver failures.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Default cap on the number of vectors an enumeration may materialize.
inline constexpr std::int64_t kDefaultSpanCap = std::int64_t{1} << 24;

// Default cap on the number of group elements an enumeration may materialize.
inline constexpr std::uint64_t kDefaultGroupCap = 10'000'000;

}  // namespace qudistill
