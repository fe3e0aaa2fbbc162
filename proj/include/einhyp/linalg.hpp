#pragma once

// Dense helpers shared by the curvature and hypersurface layers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "einhyp/errors.hpp"

namespace einhyp {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecX<double>;
using Mat = MatX<double>;

// Fully covariant rank-4 array, row-major in (i, j, k, l).
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, Scalar(0)) {}

  int dim() const { return n_; }
  Scalar& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
  const Scalar& operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  std::vector<Scalar>& data() { return data_; }
  const std::vector<Scalar>& data() const { return data_; }

  Scalar max_abs() const {
    Scalar m(0);
    for (const auto& v : data_) m = std::max<Scalar>(m, std::abs(v));
    return m;
  }

  // T'_{abcd} = T_{ijkl} E_{ia} E_{jb} E_{kc} E_{ld}. Zero frame entries are
  // skipped, so diagonal frames cost O(n^4).
  Tensor4 transformed(const MatX<Scalar>& frame) const {
    const int n = n_;
    std::vector<std::vector<std::pair<int, Scalar>>> cols(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
      for (int m = 0; m < n; ++m)
        if (frame(m, a) != Scalar(0)) cols[static_cast<std::size_t>(a)].emplace_back(m, frame(m, a));
    // One entry per column (a scaled permutation): a single gather pass.
    if (std::all_of(cols.begin(), cols.end(), [](const auto& c) { return c.size() == 1; })) {
      Tensor4 out(n);
      auto row = [&](int a) { return cols[static_cast<std::size_t>(a)][0].first; };
      auto val = [&](int a) { return cols[static_cast<std::size_t>(a)][0].second; };
      std::size_t q = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            const Scalar eijk = val(i) * val(j) * val(k);
            for (int l = 0; l < n; ++l, ++q) out.data_[q] = (*this)(row(i), row(j), row(k), row(l)) * eijk * val(l);
          }
      return out;
    }
    const std::size_t stride[4] = {static_cast<std::size_t>(n) * n * n, static_cast<std::size_t>(n) * n,
                                   static_cast<std::size_t>(n), 1};
    Tensor4 cur = *this;
    Tensor4 next(n);
    // slot with stride st: q = (outer * n + a) * st + inner
    for (int slot = 0; slot < 4; ++slot) {
      const std::size_t st = stride[slot];
      const std::size_t outer_count = data_.size() / (st * static_cast<std::size_t>(n));
      for (std::size_t outer = 0; outer < outer_count; ++outer) {
        const Scalar* src = cur.data_.data() + outer * n * st;
        Scalar* dst = next.data_.data() + outer * n * st;
        for (int a = 0; a < n; ++a) {
          Scalar* out = dst + static_cast<std::size_t>(a) * st;
          for (std::size_t inner = 0; inner < st; ++inner) out[inner] = Scalar(0);
          for (const auto& [m, e] : cols[static_cast<std::size_t>(a)]) {
            const Scalar* in = src + static_cast<std::size_t>(m) * st;
            for (std::size_t inner = 0; inner < st; ++inner) out[inner] += in[inner] * e;
          }
        }
      }
      std::swap(cur, next);
    }
    return cur;
  }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }

  int n_ = 0;
  std::vector<Scalar> data_;
};

// g-orthonormal frame by Gram-Schmidt on the coordinate frame. At each step
// the remaining coordinate vector with the largest g-norm after projection
// is taken; ties go to the lower coordinate index. Columns of the result
// are the frame vectors, so E^T g E = I.
template <typename Scalar>
MatX<Scalar> orthonormal_frame(const MatX<Scalar>& g) {
  const int n = static_cast<int>(g.rows());
  MatX<Scalar> frame(n, n);
  MatX<Scalar> gframe(n, n);  // g * frame, filled as columns are accepted
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  VecX<Scalar> v(n), best_vec(n);
  for (int col = 0; col < n; ++col) {
    int best = -1;
    Scalar best_norm(-1);
    for (int c = 0; c < n; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      // v = e_c - sum_p <e_p, e_c>_g e_p
      v.setZero();
      v(c) = Scalar(1);
      for (int p = 0; p < col; ++p) v.noalias() -= gframe(c, p) * frame.col(p);
      const Scalar norm2 = v.dot(g * v);
      if (norm2 > best_norm) {
        best_norm = norm2;
        best = c;
        best_vec = v;
      }
    }
    if (!(best_norm > Scalar(0))) throw SingularityError("metric is not positive definite");
    used[static_cast<std::size_t>(best)] = true;
    frame.col(col) = best_vec / std::sqrt(best_norm);
    gframe.col(col).noalias() = g * frame.col(col);
  }
  return frame;
}

// Inverse of a symmetric positive definite matrix; throws SingularityError
// when the Cholesky factorisation fails.
template <typename Scalar>
MatX<Scalar> spd_inverse(const MatX<Scalar>& g) {
  Eigen::LLT<MatX<Scalar>> llt(g);
  if (llt.info() != Eigen::Success) throw SingularityError("metric is not positive definite / invertible");
  return llt.solve(MatX<Scalar>::Identity(g.rows(), g.cols()));
}

}  // namespace einhyp
