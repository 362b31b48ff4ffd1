#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wavelab {

using Scalar = double;
using Index = Eigen::Index;
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Read-only view accepting any contiguous Eigen array expression.
template <class T>
using CRef = const Eigen::Ref<const T>&;

/// Thrown when a pipeline stage cannot proceed (bad config, failed precondition).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace wavelab
