#ifndef ERSDP_LINOP_HPP_
#define ERSDP_LINOP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ersdp {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vec<double>;
using MatrixXd = Mat<double>;

inline void check_dims(Index expected, Index got, const char* what) {
  if (expected != got)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
}

/// Closed interval [lower, upper] enclosing the spectrum of a symmetric operator.
template <typename Scalar>
struct SpectralInterval {
  Scalar lower = 0;
  Scalar upper = 0;

  Scalar range() const { return upper - lower; }
  Scalar center() const { return (lower + upper) / 2; }
  Scalar radius() const { return (upper - lower) / 2; }
  bool contains(Scalar x) const { return x >= lower && x <= upper; }

  /// Interval of H - mu*I given the interval of H.
  SpectralInterval shifted(Scalar mu) const { return {lower - mu, upper - mu}; }
};

/// Symmetric sparse matrix in compressed row form.
///
/// Construction always symmetrizes, so the stored pattern and values are
/// exactly symmetric. Immutable once built.
template <typename Scalar>
class SparseSymMatrix {
 public:
  using Storage = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>;
  using Triplet = Eigen::Triplet<Scalar, int>;

  SparseSymMatrix() = default;
  explicit SparseSymMatrix(Index n) : m_(n, n) { m_.makeCompressed(); }

  /// Duplicates are summed, then the result is replaced by (M + M^T) / 2.
  static SparseSymMatrix from_triplets(Index n, const std::vector<Triplet>& entries) {
    for (const auto& t : entries) {
      if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n)
        throw std::out_of_range("SparseSymMatrix: triplet index out of range");
    }
    Storage raw(n, n);
    raw.setFromTriplets(entries.begin(), entries.end());
    Storage transposed = raw.transpose();
    SparseSymMatrix out;
    out.m_ = (raw + transposed) * Scalar(0.5);
    out.m_.prune(Scalar(0));
    out.m_.makeCompressed();
    return out;
  }

  static SparseSymMatrix identity(Index n) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) t.emplace_back(int(i), int(i), Scalar(1));
    return from_triplets(n, t);
  }

  static SparseSymMatrix diagonal(const Vec<Scalar>& d) {
    std::vector<Triplet> t;
    for (Index i = 0; i < d.size(); ++i) t.emplace_back(int(i), int(i), d(i));
    return from_triplets(d.size(), t);
  }

  /// Takes ownership of an Eigen sparse matrix, symmetrizing it.
  static SparseSymMatrix from_eigen(const Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("SparseSymMatrix: matrix must be square");
    Storage transposed = m.transpose();
    SparseSymMatrix out;
    out.m_ = (m + transposed) * Scalar(0.5);
    out.m_.prune(Scalar(0));
    out.m_.makeCompressed();
    return out;
  }

  Index n() const { return m_.rows(); }
  Index nnz() const { return m_.nonZeros(); }
  const Storage& storage() const { return m_; }

  const int* row_offsets() const { return m_.outerIndexPtr(); }
  const int* col_indices() const { return m_.innerIndexPtr(); }
  const Scalar* values() const { return m_.valuePtr(); }

  Scalar coeff(Index i, Index j) const { return m_.coeff(i, j); }

  Vec<Scalar> diagonal() const {
    Vec<Scalar> d = Vec<Scalar>::Zero(n());
    for (Index i = 0; i < n(); ++i) d(i) = m_.coeff(i, i);
    return d;
  }

  /// Out = M * V for a block of columns. Each output entry is a fixed-order
  /// row sum, so results do not depend on the thread count.
  template <typename In, typename Out>
  void apply_to(const Eigen::MatrixBase<In>& V, Eigen::MatrixBase<Out> const& out_) const {
    auto& out = const_cast<Eigen::MatrixBase<Out>&>(out_);
    check_dims(n(), V.rows(), "SparseSymMatrix::apply");
    const int* rp = row_offsets();
    const int* ci = col_indices();
    const Scalar* va = values();
    const Index cols = V.cols();
    const Index rows = n();
#pragma omp parallel for schedule(static) if (rows * cols > 20000)
    for (Index i = 0; i < rows; ++i) {
      for (Index c = 0; c < cols; ++c) {
        Scalar acc = 0;
        for (int p = rp[i]; p < rp[i + 1]; ++p) acc += va[p] * V(ci[p], c);
        out(i, c) = acc;
      }
    }
  }

  Mat<Scalar> apply(const Mat<Scalar>& V) const {
    Mat<Scalar> out(n(), V.cols());
    apply_to(V, out);
    return out;
  }

  Vec<Scalar> matvec(const Vec<Scalar>& v) const {
    Vec<Scalar> out(n());
    apply_to(v, out);
    return out;
  }

  Mat<Scalar> to_dense() const { return Mat<Scalar>(m_); }

  /// Row sums of absolute off-diagonal entries.
  Vec<Scalar> offdiag_abs_row_sums() const {
    Vec<Scalar> r = Vec<Scalar>::Zero(n());
    for (Index i = 0; i < n(); ++i)
      for (typename Storage::InnerIterator it(m_, i); it; ++it)
        if (it.col() != i) r(i) += std::abs(it.value());
    return r;
  }

  SparseSymMatrix scaled(Scalar s) const {
    SparseSymMatrix out;
    out.m_ = m_ * s;
    out.m_.makeCompressed();
    return out;
  }

 private:
  Storage m_;
};

using SparseSymMatrixd = SparseSymMatrix<double>;

/// Reads an undirected edge list: one `i j [weight]` per line, 0-based,
/// each edge listed once, weight defaulting to 1. Blank lines and lines
/// starting with '#' are skipped. If `n` is 0 the dimension is one past
/// the largest index seen.
SparseSymMatrixd read_edge_list(const std::string& path, Index n = 0);
void write_edge_list(const std::string& path, const SparseSymMatrixd& adjacency);

/// The implicit operator C - lambda.A.
template <typename Scalar>
class DualShiftedOperator {
 public:
  using Matrix = SparseSymMatrix<Scalar>;
  using MatrixPtr = std::shared_ptr<const Matrix>;

  struct DiagonalShift {
    Vec<Scalar> lambda;
  };
  struct ScalarShift {
    Scalar mu;
  };
  struct GeneralShift {
    std::vector<std::pair<MatrixPtr, Scalar>> terms;
  };
  using Shift = std::variant<DiagonalShift, ScalarShift, GeneralShift>;

  DualShiftedOperator(MatrixPtr base, Shift shift) : base_(std::move(base)), shift_(std::move(shift)) {
    if (!base_) throw std::invalid_argument("DualShiftedOperator: null base matrix");
    if (auto* d = std::get_if<DiagonalShift>(&shift_)) check_dims(base_->n(), d->lambda.size(), "DualShiftedOperator");
    if (auto* g = std::get_if<GeneralShift>(&shift_)) {
      for (const auto& [a, l] : g->terms) {
        if (!a) throw std::invalid_argument("DualShiftedOperator: null constraint matrix");
        check_dims(base_->n(), a->n(), "DualShiftedOperator");
      }
    }
  }

  static DualShiftedOperator diagonal(MatrixPtr base, Vec<Scalar> lambda) {
    return DualShiftedOperator(std::move(base), DiagonalShift{std::move(lambda)});
  }
  static DualShiftedOperator scalar(MatrixPtr base, Scalar mu) {
    return DualShiftedOperator(std::move(base), ScalarShift{mu});
  }
  static DualShiftedOperator general(MatrixPtr base, std::vector<std::pair<MatrixPtr, Scalar>> terms) {
    return DualShiftedOperator(std::move(base), GeneralShift{std::move(terms)});
  }

  Index n() const { return base_->n(); }
  const Matrix& base() const { return *base_; }
  const MatrixPtr& base_ptr() const { return base_; }
  const Shift& shift() const { return shift_; }

  /// out = (C - lambda.A) V
  template <typename In, typename Out>
  void apply_to(const Eigen::MatrixBase<In>& V, Eigen::MatrixBase<Out> const& out_) const {
    auto& out = const_cast<Eigen::MatrixBase<Out>&>(out_);
    base_->apply_to(V, out);
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, DiagonalShift>) {
            out.noalias() -= s.lambda.asDiagonal() * V;
          } else if constexpr (std::is_same_v<S, ScalarShift>) {
            out.noalias() -= s.mu * V;
          } else {
            Mat<Scalar> tmp(V.rows(), V.cols());
            for (const auto& [a, l] : s.terms) {
              a->apply_to(V, tmp);
              out.noalias() -= l * tmp;
            }
          }
        },
        shift_);
  }

  Mat<Scalar> apply(const Mat<Scalar>& V) const {
    Mat<Scalar> out(n(), V.cols());
    apply_to(V, out);
    return out;
  }

  Vec<Scalar> apply(const Vec<Scalar>& v) const {
    Vec<Scalar> out(n());
    apply_to(v, out);
    return out;
  }

  /// Explicit sparse assembly of C - lambda.A.
  SparseSymMatrix<Scalar> assemble() const {
    using Storage = typename Matrix::Storage;
    Storage m = base_->storage();
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, DiagonalShift>) {
            Storage d(n(), n());
            std::vector<Eigen::Triplet<Scalar, int>> t;
            for (Index i = 0; i < n(); ++i) t.emplace_back(int(i), int(i), s.lambda(i));
            d.setFromTriplets(t.begin(), t.end());
            m = m - d;
          } else if constexpr (std::is_same_v<S, ScalarShift>) {
            Storage d(n(), n());
            d.setIdentity();
            m = m - s.mu * d;
          } else {
            for (const auto& [a, l] : s.terms) m = m - l * a->storage();
          }
        },
        shift_);
    return Matrix::from_eigen(m);
  }

  Mat<Scalar> to_dense() const { return assemble().to_dense(); }

 private:
  MatrixPtr base_;
  Shift shift_;
};

using DualShiftedOperatord = DualShiftedOperator<double>;

/// Gershgorin enclosure of a symmetric sparse matrix.
template <typename Scalar>
SpectralInterval<Scalar> gershgorin_interval(const SparseSymMatrix<Scalar>& m) {
  if (m.n() == 0) return {0, 0};
  const Vec<Scalar> d = m.diagonal();
  const Vec<Scalar> r = m.offdiag_abs_row_sums();
  return {(d - r).minCoeff(), (d + r).maxCoeff()};
}

/// Gershgorin enclosure of C - lambda.A. Diagonal and scalar shifts only
/// move the disc centres; general shifts are assembled explicitly.
template <typename Scalar>
SpectralInterval<Scalar> gershgorin_interval(const DualShiftedOperator<Scalar>& op) {
  using Op = DualShiftedOperator<Scalar>;
  if (op.n() == 0) return {0, 0};
  const auto& shift = op.shift();
  if (const auto* s = std::get_if<typename Op::ScalarShift>(&shift))
    return gershgorin_interval(op.base()).shifted(s->mu);
  if (const auto* s = std::get_if<typename Op::DiagonalShift>(&shift)) {
    const Vec<Scalar> d = op.base().diagonal() - s->lambda;
    const Vec<Scalar> r = op.base().offdiag_abs_row_sums();
    return {(d - r).minCoeff(), (d + r).maxCoeff()};
  }
  return gershgorin_interval(op.assemble());
}

}  // namespace ersdp

#endif  // ERSDP_LINOP_HPP_
