#pragma once

// Finite-difference curvature oracle for an arbitrary coordinate metric.
//
// Sign convention. The curvature operator is
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
// and the (0,4) tensor is R(X,Y,Z,W) = <R(X,Y)Z, W>. In coordinates
//   R_ijkl = g_lm R^m_ijk,
//   R^m_ijk = d_i G^m_jk - d_j G^m_ik + G^m_ip G^p_jk - G^m_jp G^p_ik.
// With this ordering the Ricci tensor is the trace over the first and last
// slots, Ric(Y,Z) = sum_i R(e_i, Y, Z, e_i), which is exactly the trace that
// turns the Gauss equation of a hypersurface in I x_f Q^n(c) into its Ricci
// formula: the first Gauss term a(<X,Z><Y,W> - <Y,Z><X,W>) traces to
// -(n-1) a <Y,Z>. The sectional curvature is
//   sec(X,Y) = R(X,Y,Y,X) / (|X|^2 |Y|^2 - <X,Y>^2),
// which is +k on a space form of curvature k.
//
// Derivatives. Both stencils are second-order central differences:
//  * kNestedChristoffel: Christoffel symbols from central differences of g,
//    then d_i G from central differences of G (reach 2h per axis);
//  * kMetricHessian: first and second derivatives of g from central
//    differences at x, then
//      R_ijkl = 1/2 (g_jl,ik - g_jk,il - g_il,jk + g_ik,jl)
//               + G_mjl G^m_ik - G_mil G^m_jk,   G_mil = g_mp G^p_il,
//    which is the same tensor with fewer metric evaluations.
// Optional Richardson extrapolation combines steps h and h/2 as
// (4 R(h/2) - R(h)) / 3, removing the h^2 error term of either stencil.

#include <algorithm>
#include <string>
#include <vector>

#include "einhyp/coordinate_metric.hpp"
#include "einhyp/errors.hpp"
#include "einhyp/linalg.hpp"

namespace einhyp {

enum class RiemannStencil { kNestedChristoffel, kMetricHessian };

struct OracleConfig {
  double step = 1e-3;
  bool richardson = true;
  RiemannStencil stencil = RiemannStencil::kMetricHessian;
  bool compute_weyl = true;

  // Distance from the domain boundary the stencils need.
  double margin() const { return 2.0 * step; }
};

template <typename Scalar>
struct CurvatureBundle {
  int dim = 0;
  VecX<Scalar> point;
  MatX<Scalar> metric;
  MatX<Scalar> metric_inverse;
  MatX<Scalar> frame;  // orthonormal_frame(metric)
  std::vector<Scalar> christoffel;  // G^k_ij at (k * n + i) * n + j
  Tensor4<Scalar> riemann;          // R_ijkl
  MatX<Scalar> ricci;
  Scalar scalar = Scalar(0);
  Tensor4<Scalar> weyl;  // zero when dim < 4

  Scalar gamma(int k, int i, int j) const {
    return christoffel[(static_cast<std::size_t>(k) * dim + i) * dim + j];
  }

  // R(X,Y,Z,W) for coordinate vectors.
  Scalar riemann_form(const VecX<Scalar>& x, const VecX<Scalar>& y, const VecX<Scalar>& z,
                      const VecX<Scalar>& w) const {
    Scalar acc(0);
    const int n = dim;
    for (int i = 0; i < n; ++i) {
      if (x(i) == Scalar(0)) continue;
      for (int j = 0; j < n; ++j) {
        if (y(j) == Scalar(0)) continue;
        for (int k = 0; k < n; ++k) {
          if (z(k) == Scalar(0)) continue;
          for (int l = 0; l < n; ++l) acc += riemann(i, j, k, l) * x(i) * y(j) * z(k) * w(l);
        }
      }
    }
    return acc;
  }
};

namespace detail {

template <typename Scalar>
struct StencilLevel {
  std::vector<Scalar> christoffel;
  Tensor4<Scalar> riemann;
};

inline std::size_t gidx(int n, int k, int i, int j) { return (static_cast<std::size_t>(k) * n + i) * n + j; }

// G^k_ij = 1/2 g^kl (d_i g_lj + d_j g_li - d_l g_ij)
template <typename Scalar>
std::vector<Scalar> christoffel_from(const MatX<Scalar>& ginv, const std::vector<MatX<Scalar>>& dg) {
  const int n = static_cast<int>(ginv.rows());
  // first-kind symbols G_lij
  std::vector<Scalar> first(static_cast<std::size_t>(n) * n * n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) first[gidx(n, l, i, j)] = Scalar(0.5) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
  std::vector<Scalar> out(first.size(), Scalar(0));
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const Scalar gkl = ginv(k, l);
      if (gkl == Scalar(0)) continue;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[gidx(n, k, i, j)] += gkl * first[gidx(n, l, i, j)];
    }
  return out;
}

template <typename Scalar>
MatX<Scalar> inverse_at(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, MatX<Scalar>& g) {
  metric.evaluate_into(x, g);
  return spd_inverse<Scalar>(g);
}

template <typename Scalar>
std::vector<MatX<Scalar>> first_derivatives(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, Scalar h,
                                            MatX<Scalar>& gp, MatX<Scalar>& gm) {
  const int n = metric.dim();
  std::vector<MatX<Scalar>> dg(static_cast<std::size_t>(n));
  VecX<Scalar> y = x;
  for (int i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    metric.evaluate_into(y, gp);
    y(i) = x(i) - h;
    metric.evaluate_into(y, gm);
    y(i) = x(i);
    dg[i] = (gp - gm) / (Scalar(2) * h);
  }
  return dg;
}

template <typename Scalar>
std::vector<Scalar> christoffel_at(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, Scalar h) {
  const int n = metric.dim();
  MatX<Scalar> g(n, n), gp(n, n), gm(n, n);
  const MatX<Scalar> ginv = inverse_at(metric, x, g);
  return christoffel_from(ginv, first_derivatives(metric, x, h, gp, gm));
}

template <typename Scalar>
StencilLevel<Scalar> level_nested(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, Scalar h) {
  const int n = metric.dim();
  StencilLevel<Scalar> out;
  out.christoffel = christoffel_at(metric, x, h);
  // dG[i] = d_i G^m_jk
  std::vector<std::vector<Scalar>> dgamma(static_cast<std::size_t>(n));
  VecX<Scalar> y = x;
  for (int i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    const auto plus = christoffel_at(metric, y, h);
    y(i) = x(i) - h;
    const auto minus = christoffel_at(metric, y, h);
    y(i) = x(i);
    dgamma[i].resize(plus.size());
    for (std::size_t q = 0; q < plus.size(); ++q) dgamma[i][q] = (plus[q] - minus[q]) / (Scalar(2) * h);
  }
  MatX<Scalar> g(n, n);
  metric.evaluate_into(x, g);
  const auto& G = out.christoffel;
  out.riemann = Tensor4<Scalar>(n);
  std::vector<Scalar> up(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        for (int m = 0; m < n; ++m) {
          Scalar r = dgamma[i][gidx(n, m, j, k)] - dgamma[j][gidx(n, m, i, k)];
          for (int p = 0; p < n; ++p) r += G[gidx(n, m, i, p)] * G[gidx(n, p, j, k)] - G[gidx(n, m, j, p)] * G[gidx(n, p, i, k)];
          up[m] = r;
        }
        for (int l = 0; l < n; ++l) {
          Scalar acc(0);
          for (int m = 0; m < n; ++m) acc += g(l, m) * up[m];
          out.riemann(i, j, k, l) = acc;
        }
      }
  return out;
}

template <typename Scalar>
StencilLevel<Scalar> level_hessian(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, Scalar h) {
  const int n = metric.dim();
  MatX<Scalar> g0(n, n), gp(n, n), gm(n, n), gpp(n, n), gpm(n, n), gmp(n, n), gmm(n, n);
  const MatX<Scalar> ginv = inverse_at(metric, x, g0);
  std::vector<MatX<Scalar>> dg(static_cast<std::size_t>(n));
  std::vector<MatX<Scalar>> d2g(static_cast<std::size_t>(n) * n);
  auto h2 = [&](int i, int j) -> MatX<Scalar>& { return d2g[static_cast<std::size_t>(i) * n + j]; };
  VecX<Scalar> y = x;
  for (int i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    metric.evaluate_into(y, gp);
    y(i) = x(i) - h;
    metric.evaluate_into(y, gm);
    y(i) = x(i);
    dg[i] = (gp - gm) / (Scalar(2) * h);
    h2(i, i) = (gp - Scalar(2) * g0 + gm) / (h * h);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      y(i) = x(i) + h;
      y(j) = x(j) + h;
      metric.evaluate_into(y, gpp);
      y(j) = x(j) - h;
      metric.evaluate_into(y, gpm);
      y(i) = x(i) - h;
      metric.evaluate_into(y, gmm);
      y(j) = x(j) + h;
      metric.evaluate_into(y, gmp);
      y(i) = x(i);
      y(j) = x(j);
      h2(i, j) = (gpp - gpm - gmp + gmm) / (Scalar(4) * h * h);
      h2(j, i) = h2(i, j);
    }
  StencilLevel<Scalar> out;
  out.christoffel = christoffel_from(ginv, dg);
  const auto& G = out.christoffel;
  // lowered symbols G_mil = g_mp G^p_il
  std::vector<Scalar> low(G.size(), Scalar(0));
  for (int m = 0; m < n; ++m)
    for (int p = 0; p < n; ++p) {
      const Scalar gmp_ = g0(m, p);
      if (gmp_ == Scalar(0)) continue;
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) low[gidx(n, m, i, l)] += gmp_ * G[gidx(n, p, i, l)];
    }
  // This form is exactly antisymmetric in (i,j) and in (k,l), so only
  // i < j, k < l is computed.
  out.riemann = Tensor4<Scalar>(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          Scalar r = Scalar(0.5) * (h2(i, k)(j, l) - h2(i, l)(j, k) - h2(j, k)(i, l) + h2(j, l)(i, k));
          for (int m = 0; m < n; ++m) r += low[gidx(n, m, j, l)] * G[gidx(n, m, i, k)] - low[gidx(n, m, i, l)] * G[gidx(n, m, j, k)];
          out.riemann(i, j, k, l) = r;
          out.riemann(j, i, k, l) = -r;
          out.riemann(i, j, l, k) = -r;
          out.riemann(j, i, l, k) = r;
        }
  return out;
}

template <typename Scalar>
StencilLevel<Scalar> level(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x, Scalar h,
                           RiemannStencil stencil) {
  return stencil == RiemannStencil::kNestedChristoffel ? level_nested(metric, x, h) : level_hessian(metric, x, h);
}

}  // namespace detail

// Ricci and scalar curvature plus Weyl from the decomposition
//   R = W + P (.) g,  P = (Ric - scal / (2(n-1)) g) / (n-2),
//   (P (.) g)_ijkl = P_il g_jk + P_jk g_il - P_ik g_jl - P_jl g_ik.
template <typename Scalar>
void complete_bundle(CurvatureBundle<Scalar>& b, bool compute_weyl) {
  const int n = b.dim;
  const auto& gi = b.metric_inverse;
  b.ricci = MatX<Scalar>::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Scalar acc(0);
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) acc += gi(i, l) * b.riemann(i, j, k, l);
      b.ricci(j, k) = acc;
    }
  b.scalar = (gi.array() * b.ricci.array()).sum();
  b.weyl = Tensor4<Scalar>(n);
  if (n < 4 || !compute_weyl) return;
  const auto& g = b.metric;
  const MatX<Scalar> schouten = (b.ricci - b.scalar / (Scalar(2) * (n - 1)) * g) / Scalar(n - 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Scalar pg = schouten(i, l) * g(j, k) + schouten(j, k) * g(i, l) - schouten(i, k) * g(j, l) -
                            schouten(j, l) * g(i, k);
          b.weyl(i, j, k, l) = b.riemann(i, j, k, l) - pg;
        }
}

// Curvature at x. Throws MarginError when the stencil would leave the domain
// and SingularityError when the metric cannot be inverted.
template <typename Scalar>
CurvatureBundle<Scalar> curvature_oracle(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x,
                                         const OracleConfig& config = {}) {
  const int n = metric.dim();
  if (x.size() != n) throw DomainError("point dimension does not match metric dimension");
  if (!metric.domain().contains(x, Scalar(config.margin()))) {
    throw MarginError("point closer than 2*step = " + std::to_string(config.margin()) + " to the domain boundary");
  }
  CurvatureBundle<Scalar> b;
  b.dim = n;
  b.point = x;
  b.metric = MatX<Scalar>(n, n);
  b.metric_inverse = detail::inverse_at(metric, x, b.metric);
  b.frame = orthonormal_frame<Scalar>(b.metric);
  const Scalar h(config.step);
  auto coarse = detail::level(metric, x, h, config.stencil);
  if (config.richardson) {
    auto fine = detail::level(metric, x, h / Scalar(2), config.stencil);
    for (std::size_t q = 0; q < coarse.christoffel.size(); ++q) {
      coarse.christoffel[q] = (Scalar(4) * fine.christoffel[q] - coarse.christoffel[q]) / Scalar(3);
    }
    auto& rc = coarse.riemann.data();
    const auto& rf = fine.riemann.data();
    for (std::size_t q = 0; q < rc.size(); ++q) rc[q] = (Scalar(4) * rf[q] - rc[q]) / Scalar(3);
  }
  b.christoffel = std::move(coarse.christoffel);
  b.riemann = std::move(coarse.riemann);
  complete_bundle(b, config.compute_weyl);
  return b;
}

// Christoffel symbols alone, G^k_ij at (k * n + i) * n + j, with the same
// step and Richardson setting as the oracle.
template <typename Scalar>
std::vector<Scalar> christoffel_symbols(const CoordinateMetric<Scalar>& metric, const VecX<Scalar>& x,
                                        const OracleConfig& config = {}) {
  const Scalar h(config.step);
  auto coarse = detail::christoffel_at(metric, x, h);
  if (!config.richardson) return coarse;
  const auto fine = detail::christoffel_at(metric, x, h / Scalar(2));
  for (std::size_t q = 0; q < coarse.size(); ++q) coarse[q] = (Scalar(4) * fine[q] - coarse[q]) / Scalar(3);
  return coarse;
}

// sec(X,Y) = R(X,Y,Y,X) / (|X|^2 |Y|^2 - <X,Y>^2) with respect to `metric`.
// Throws DegeneratePlaneError when X and Y are dependent.
template <typename Scalar>
Scalar sectional_curvature(const CurvatureBundle<Scalar>& b, const MatX<Scalar>& metric, const VecX<Scalar>& x,
                           const VecX<Scalar>& y) {
  const Scalar xx = x.dot(metric * x);
  const Scalar yy = y.dot(metric * y);
  const Scalar xy = x.dot(metric * y);
  const Scalar area2 = xx * yy - xy * xy;
  if (!(area2 > Scalar(1e-12) * xx * yy)) throw DegeneratePlaneError("plane vectors are linearly dependent");
  return b.riemann_form(x, y, y, x) / area2;
}

template <typename Scalar>
Scalar sectional_curvature(const CurvatureBundle<Scalar>& b, const VecX<Scalar>& x, const VecX<Scalar>& y) {
  return sectional_curvature(b, b.metric, x, y);
}

// Pointwise |W| = sqrt(W_ijkl W^ijkl); zero for dim < 4.
template <typename Scalar>
Scalar weyl_norm(const CurvatureBundle<Scalar>& b, const MatX<Scalar>& metric) {
  if (b.dim < 4) return Scalar(0);
  const auto frame = orthonormal_frame<Scalar>(metric);
  const auto w = b.weyl.transformed(frame);
  Scalar acc(0);
  for (const auto& v : w.data()) acc += v * v;
  return std::sqrt(acc);
}

template <typename Scalar>
Scalar weyl_norm(const CurvatureBundle<Scalar>& b) {
  if (b.dim < 4) return Scalar(0);
  const auto w = b.weyl.transformed(b.frame);
  Scalar acc(0);
  for (const auto& v : w.data()) acc += v * v;
  return std::sqrt(acc);
}

// Residuals of the algebraic identities, measured on orthonormal-frame
// components so they are independent of coordinate scaling.
template <typename Scalar>
struct SymmetryResiduals {
  Scalar antisymmetry = Scalar(0);  // R_ijkl + R_jikl, R_ijkl + R_ijlk
  Scalar pair_symmetry = Scalar(0); // R_ijkl - R_klij
  Scalar bianchi = Scalar(0);       // R_ijkl + R_jkil + R_kijl
  Scalar weyl_trace = Scalar(0);    // sum_i W_ijki over an orthonormal frame
  Scalar scalar_trace = Scalar(0);  // scal - tr_g Ric
};

template <typename Scalar>
SymmetryResiduals<Scalar> symmetry_residuals(const CurvatureBundle<Scalar>& b) {
  const int n = b.dim;
  const auto& frame = b.frame;
  const auto r = b.riemann.transformed(frame);
  SymmetryResiduals<Scalar> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const Scalar v = r(i, j, k, l);
          out.antisymmetry = std::max<Scalar>(out.antisymmetry, std::abs(v + r(j, i, k, l)));
          out.antisymmetry = std::max<Scalar>(out.antisymmetry, std::abs(v + r(i, j, l, k)));
          out.pair_symmetry = std::max<Scalar>(out.pair_symmetry, std::abs(v - r(k, l, i, j)));
          out.bianchi = std::max<Scalar>(out.bianchi, std::abs(v + r(j, k, i, l) + r(k, i, j, l)));
        }
  if (n >= 4) {
    const auto w = b.weyl.transformed(frame);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Scalar tr(0);
        for (int i = 0; i < n; ++i) tr += w(i, j, k, i);
        out.weyl_trace = std::max<Scalar>(out.weyl_trace, std::abs(tr));
      }
  }
  out.scalar_trace = std::abs(b.scalar - (b.metric_inverse.array() * b.ricci.array()).sum());
  return out;
}

// Ricci tensor in the orthonormal frame of the bundle's metric.
template <typename Scalar>
MatX<Scalar> ricci_in_frame(const CurvatureBundle<Scalar>& b) {
  return b.frame.transpose() * b.ricci * b.frame;
}

}  // namespace einhyp
