#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace degdist {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Bad input: preconditions on sizes, rates, bounds or file contents.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its tolerance or hit a singular system.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Design { ego, snowball1, induced, incident, random_walk };

std::string_view to_string(Design design);
Design parse_design(std::string_view name);

/// Designs whose operator is upper triangular (observed degree <= true degree
/// with loss of edges).
inline bool is_subgraph_design(Design d) {
  return d == Design::induced || d == Design::incident || d == Design::random_walk;
}

/// splitmix64 finalizer applied to (master, index). Used everywhere a
/// per-trial or per-replicate stream is needed so results do not depend on
/// scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace degdist
