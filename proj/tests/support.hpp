#ifndef ERSDP_TESTS_SUPPORT_HPP_
#define ERSDP_TESTS_SUPPORT_HPP_

#include "ersdp/linop.hpp"

#include <Eigen/Eigenvalues>
#include <memory>
#include <random>

namespace ersdp::test {

// symmetric, about `per_row` off-diagonal entries per row, values in [-1, 1], diagonal in [-1, 1]
inline SparseSymMatrixd random_sparse(Index n, double per_row, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-1, 1), p(0, 1);
  const double prob = std::min(1.0, per_row / double(std::max<Index>(n - 1, 1)));
  std::vector<SparseSymMatrixd::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(int(i), int(i), scale * u(eng));
    for (Index j = i + 1; j < n; ++j) {
      if (p(eng) < prob) {
        const double v = scale * u(eng);
        t.emplace_back(int(i), int(j), v);
        t.emplace_back(int(j), int(i), v);
      }
    }
  }
  return SparseSymMatrixd::from_triplets(n, t);
}

inline std::shared_ptr<const SparseSymMatrixd> share(SparseSymMatrixd m) {
  return std::make_shared<const SparseSymMatrixd>(std::move(m));
}

// f applied to the spectrum of a dense symmetric matrix
template <typename F>
MatrixXd dense_fn(const MatrixXd& H, F f) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  VectorXd d = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline double rel_err(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / b.norm(); }

// first root of a decreasing function on [lo, hi]
template <typename F>
double bisect(F f, double lo, double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    const double mid = (lo + hi) / 2;
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace ersdp::test

#endif  // ERSDP_TESTS_SUPPORT_HPP_
