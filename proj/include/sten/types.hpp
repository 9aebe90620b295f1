#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sten {

inline constexpr const char* kToolVersion = "sten 0.1.0";

// Ambient dimension and target dimension are both capped at 3.
inline constexpr int kMaxDim = 3;

// Small dense types sized at runtime but bounded at compile time, so they
// live on the stack inside node loops.
template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

using Vec = VecT<double>;
using Mat = MatT<double>;

using Index = std::ptrdiff_t;

// Error taxonomy; the CLI maps these onto its exit-code contract.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Invalid values or out-of-domain requests (non-finite input, ball leaving
// the box, eps <= 0, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Mismatched array/grid shapes.
struct ShapeError : DomainError {
  using DomainError::DomainError;
};
// Operation not defined for the given inputs (e.g. connections for a
// potential whose minima form a continuum).
struct UnsupportedError : DomainError {
  using DomainError::DomainError;
};
// Grid too coarse to resolve the requested scale.
struct ResolutionError : DomainError {
  using DomainError::DomainError;
};

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

}  // namespace sten
