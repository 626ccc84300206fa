#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qsuff/matrix_core.hpp"

namespace qsuff {

// Seeded generator for all randomized routines. mt19937_64 is fully specified
// by the standard and normals are produced by Box-Muller on raw uniform bits,
// so identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return std::ldexp(static_cast<double>(gen_() >> 11), -53);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t raw() { return gen_(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(gen_() % span);
  }

  Complex cnormal() { return Complex(normal(), normal()) / std::sqrt(2.0); }

  Matrix ginibre(int rows, int cols) {
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) = cnormal();
    return g;
  }

  Matrix real_gaussian(int rows, int cols) {
    Matrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) = normal();
    return g;
  }

  // Normalized Wishart state; faithful with probability one.
  DensityMatrix wishart_state(int d, bool real_entries = false) {
    Matrix g = real_entries ? real_gaussian(d, d) : ginibre(d, d);
    Matrix w = g * g.adjoint();
    w /= w.trace().real();
    return DensityMatrix(0.5 * (w + w.adjoint()));
  }

  Matrix random_hermitian(int d) {
    Matrix g = ginibre(d, d);
    return 0.5 * (g + g.adjoint());
  }

  // Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
  Matrix haar_unitary(int d) {
    Matrix g = ginibre(d, d);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
      Complex ph = r(i, i) == Complex(0, 0) ? Complex(1, 0) : r(i, i) / std::abs(r(i, i));
      q.col(i) *= ph;
    }
    return q;
  }

  // Haar isometry: d_from orthonormal columns in dimension d_to.
  Matrix haar_isometry(int d_to, int d_from) {
    Matrix u = haar_unitary(d_to);
    return u.leftCols(d_from);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qsuff
