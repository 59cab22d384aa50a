#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace clsrec {

// 64-bit floats throughout; small data, keeps gradient checks exact.
using Real = double;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using SpMat = Eigen::SparseMatrix<Real, Eigen::RowMajor>;  // CSR layout
using Index = Eigen::Index;

enum class ErrorKind { Usage = 1, Data = 2, Numeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Seeded RNG with self-contained distributions so streams do not depend on
// the standard library's implementation-defined distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // uniform in [0, 1)
  Real uniform() { return static_cast<Real>(gen_() >> 11) * 0x1.0p-53; }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  // unbiased uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // standard normal via Box-Muller
  Real normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    Real u1 = 1.0 - uniform();  // (0, 1]
    Real u2 = uniform();
    Real r = std::sqrt(-2.0 * std::log(u1));
    Real theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Mat gaussian_matrix(Index rows, Index cols, Real stddev = 1.0) {
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = stddev * normal();
    return m;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  Real spare_ = 0.0;
};

// splitmix64; used to derive independent sub-streams from one run seed
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace clsrec
