#include "einhyp/hypersurface.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <type_traits>

#include "einhyp/errors.hpp"

namespace einhyp {

using json = nlohmann::json;

namespace {

// Central difference of a field along coordinate j, optionally combined
// over h and h/2 to cancel the h^2 term.
template <typename F>
auto partial(const F& field, const Vec& x, int j, double h, bool richardson) {
  using R = std::decay_t<decltype(field(x))>;
  auto central = [&](double step) -> R {
    Vec y = x;
    y(j) = x(j) + step;
    const R p = field(y);
    y(j) = x(j) - step;
    const R m = field(y);
    return R((p - m) / (2.0 * step));
  };
  const R coarse = central(h);
  if (!richardson) return coarse;
  const R fine = central(0.5 * h);
  return R((4.0 * fine - coarse) / 3.0);
}

// (Gamma_j)^i_m = G^i_jm, the connection matrix along coordinate j.
Mat connection_matrix(const std::vector<double>& gamma, int n, int j) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = gamma[(static_cast<std::size_t>(i) * n + j) * n + k];
  return m;
}

std::vector<Mat> connection_matrices(const std::vector<double>& gamma, int n) {
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out.push_back(connection_matrix(gamma, n, j));
  return out;
}

double fp_over_f(const SmoothFn& f, double t) {
  const auto jet = eval_with_derivatives(f, t, 1);
  if (!(jet[0] > 0.0)) throw DomainError("f is not positive at t = " + std::to_string(t));
  return jet[1] / jet[0];
}

double ricci_corollary_at(const StructureData& data, const Mat& g, const Mat& A, const Vec& T, double t,
                          const Vec& X, const Vec& Y) {
  const int n = data.dim();
  const auto inv = ambient_invariants(data.f, data.c, t);
  const double tn2 = g_dot(g, T, T);
  const double nH = A.trace();
  const Vec AX = A * X;
  return -((n - 1) * inv.a + tn2 * inv.b) * g_dot(g, X, Y) - (n - 2) * inv.b * g_dot(g, X, T) * g_dot(g, Y, T) +
         nH * g_dot(g, AX, Y) - g_dot(g, AX, A * Y);
}

std::string fiber_suffix(std::size_t i) { return "_phi" + std::to_string(i + 1); }

}  // namespace

const char* orientation_name(Orientation o) { return o == Orientation::kFlipped ? "flipped" : "as-supplied"; }

StructureData flipped(const StructureData& data) {
  StructureData out = data;
  auto shape = data.shape;
  auto angle = data.angle;
  out.shape = [shape](const Vec& x) -> Mat { return -shape(x); };
  out.angle = [angle](const Vec& x) { return -angle(x); };
  out.orientation = data.orientation == Orientation::kFlipped ? Orientation::kAsSupplied : Orientation::kFlipped;
  return out;
}

// ---- warped closed-form datum ---------------------------------------------

StructureData to_structure_data(const WarpedStructure& w) {
  w.metric.validate();
  if (w.shape_fibers.size() != w.metric.fibers.size()) {
    throw ConstraintError("shape needs one eigenvalue function per fiber");
  }
  StructureData d;
  d.metric = build_mwp_metric<double>(w.metric);
  const int n = w.metric.total_dim();
  std::vector<std::pair<int, int>> blocks;
  for (std::size_t i = 0; i < w.metric.fibers.size(); ++i) {
    blocks.emplace_back(w.metric.fiber_offset(i), w.metric.fibers[i].dim());
  }
  const SmoothFn base = w.shape_base;
  const std::vector<SmoothFn> fibers = w.shape_fibers;
  d.shape = [n, base, fibers, blocks](const Vec& x) -> Mat {
    Mat A = Mat::Zero(n, n);
    A(0, 0) = base.evaluate(x(0));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      A.diagonal().segment(blocks[i].first, blocks[i].second).setConstant(fibers[i].evaluate(x(0)));
    }
    return A;
  };
  const SmoothFn ts = w.tangent_s;
  d.tangent = [n, ts](const Vec& x) -> Vec {
    Vec T = Vec::Zero(n);
    T(0) = ts.evaluate(x(0));
    return T;
  };
  const SmoothFn th = w.theta;
  d.angle = [th](const Vec& x) { return th.evaluate(x(0)); };
  const SmoothFn ht = w.height;
  d.height = [ht](const Vec& x) { return ht.evaluate(x(0)); };
  d.f = w.f;
  d.c = w.c;
  d.orientation = w.orientation;
  return d;
}

json to_json(const WarpedStructure& w) {
  json fibers = json::array();
  for (const auto& s : w.shape_fibers) fibers.push_back(to_json(s));
  return {{"metric", to_json(w.metric)},
          {"shape", {{"base", to_json(w.shape_base)}, {"fibers", fibers}}},
          {"tangent_s", to_json(w.tangent_s)},
          {"theta", to_json(w.theta)},
          {"height", to_json(w.height)},
          {"ambient", {{"f", to_json(w.f)}, {"c", w.c}}},
          {"orientation", orientation_name(w.orientation)}};
}

WarpedStructure warped_structure_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("structure datum must be an object");
  for (const char* key : {"metric", "shape", "tangent_s", "theta", "height", "ambient"}) {
    if (!j.contains(key)) throw SchemaError(std::string("structure datum missing '") + key + "'");
  }
  WarpedStructure w;
  w.metric = mwp_spec_from_json(j.at("metric"));
  const auto& shape = j.at("shape");
  if (!shape.is_object() || !shape.contains("base") || !shape.contains("fibers") || !shape.at("fibers").is_array()) {
    throw SchemaError("'shape' needs 'base' and a 'fibers' array");
  }
  w.shape_base = smooth_fn_from_json(shape.at("base"));
  for (const auto& s : shape.at("fibers")) w.shape_fibers.push_back(smooth_fn_from_json(s));
  if (w.shape_fibers.size() != w.metric.fibers.size()) {
    throw SchemaError("'shape.fibers' must have one entry per metric fiber");
  }
  w.tangent_s = smooth_fn_from_json(j.at("tangent_s"));
  w.theta = smooth_fn_from_json(j.at("theta"));
  w.height = smooth_fn_from_json(j.at("height"));
  const auto& amb = j.at("ambient");
  if (!amb.is_object() || !amb.contains("f") || !amb.contains("c")) throw SchemaError("'ambient' needs 'f' and 'c'");
  w.f = smooth_fn_from_json(amb.at("f"));
  if (!amb.at("c").is_number_integer()) throw SchemaError("'ambient.c' must be -1, 0 or 1");
  w.c = amb.at("c").get<int>();
  if (w.c < -1 || w.c > 1) throw SchemaError("'ambient.c' must be -1, 0 or 1");
  if (j.contains("orientation")) {
    const auto o = j.at("orientation").get<std::string>();
    if (o == "flipped") {
      w.orientation = Orientation::kFlipped;
    } else if (o != "as-supplied") {
      throw SchemaError("'orientation' must be 'as-supplied' or 'flipped'");
    }
  }
  return w;
}

// ---- invariants and helpers -----------------------------------------------

AmbientInvariants ambient_invariants(const SmoothFn& f, int c, double t) {
  const auto jet = eval_with_derivatives(f, t, 2);
  if (!(jet[0] > 0.0)) throw DomainError("f(" + std::to_string(t) + ") is not positive");
  const double f0 = jet[0], f1 = jet[1], f2 = jet[2];
  AmbientInvariants out;
  out.a = (f1 * f1 - c) / (f0 * f0);
  out.b = f2 / f0 - (f1 * f1) / (f0 * f0) + c / (f0 * f0);
  return out;
}

double g_dot(const Mat& g, const Vec& x, const Vec& y) {
  const Eigen::Index n = g.rows();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) col += x(i) * g(i, j);
    acc += col * y(j);
  }
  return acc;
}
double g_norm(const Mat& g, const Vec& x) { return std::sqrt(std::max(0.0, g_dot(g, x, x))); }

std::vector<Vec> sample_directions(int dim, int random, std::uint64_t seed) {
  std::vector<Vec> out;
  for (int i = 0; i < dim; ++i) out.push_back(Vec::Unit(dim, i));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int q = 0; q < random; ++q) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    out.push_back(v / v.norm());
  }
  return out;
}

// ---- structure conditions -------------------------------------------------

StructureEvaluator::StructureEvaluator(const StructureData& data, const CheckConfig& config)
    : data_(data), config_(config) {
  const int n = data.dim();
  directions_ = sample_directions(n, config.random_directions, config.seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs_.emplace_back(Vec::Unit(n, i), Vec::Unit(n, j));
  const auto extra = sample_directions(n, 2 * config.random_directions, config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int q = 0; q < config.random_directions; ++q) {
    pairs_.emplace_back(extra[static_cast<std::size_t>(n + 2 * q)], extra[static_cast<std::size_t>(n + 2 * q + 1)]);
  }
}

StructurePointResiduals StructureEvaluator::at(const Vec& x, const CurvatureBundle<double>& bundle) const {
  const int n = data_.dim();
  const double h = config_.oracle.step;
  const bool rich = config_.oracle.richardson;
  const Mat& g = bundle.metric;
  const Mat& ginv = bundle.metric_inverse;
  const Mat A = data_.shape(x);
  const Vec T = data_.tangent(x);
  const double theta = data_.angle(x);
  const double t = data_.height(x);
  const double fpf = fp_over_f(data_.f, t);
  const auto inv = ambient_invariants(data_.f, data_.c, t);
  const auto gam = connection_matrices(bundle.christoffel, n);

  std::vector<Mat> dA(static_cast<std::size_t>(n));
  std::vector<Vec> dT(static_cast<std::size_t>(n));
  Vec dtheta(n), dpi(n);
  for (int j = 0; j < n; ++j) {
    dA[j] = partial(data_.shape, x, j, h, rich);
    dT[j] = partial(data_.tangent, x, j, h, rich);
    dtheta(j) = partial(data_.angle, x, j, h, rich);
    dpi(j) = partial(data_.height, x, j, h, rich);
  }
  // Residuals (C), (D) are linear in X and (E) is bilinear in (X, Y), so
  // their coefficients are assembled once per point.
  const Vec gT = g * T;
  const Mat AT = A * T;
  Mat c_map = -fpf * (Mat::Identity(n, n) - T * gT.transpose()) - theta * A;
  Mat codazzi(n, n * n);  // block j: nabla_j A
  for (int j = 0; j < n; ++j) {
    c_map.col(j) += dT[j] + gam[j] * T;
    codazzi.middleCols(j * n, n).noalias() = dA[j] + gam[j] * A - A * gam[j];
  }
  const Vec d_map = dtheta + g * AT + fpf * theta * gT;

  StructurePointResiduals r;
  const Mat& frame = bundle.frame;
  const Mat S = frame.transpose() * g * A * frame;  // <A e_a, e_b> up to transpose
  r.self_adjoint = (S - S.transpose()).cwiseAbs().maxCoeff();
  r.unit_decomposition = std::abs(gT.dot(T) + theta * theta - 1.0);
  r.t_gradient = g_norm(g, T - ginv * dpi);

  Vec X(n), Y(n), v(n), xy(n * n), yx(n * n);
  for (const auto& raw : directions_) {
    X = raw / g_norm(g, raw);
    v.noalias() = c_map * X;
    r.tangent_hessian = std::max(r.tangent_hessian, g_norm(g, v));
    r.angle_gradient = std::max(r.angle_gradient, std::abs(d_map.dot(X)));
  }
  const double tb = theta * inv.b;
  for (const auto& [rx, ry] : pairs_) {
    X = rx / g_norm(g, rx);
    Y = ry / g_norm(g, ry);
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) {
        xy(j * n + m) = X(j) * Y(m);
        yx(j * n + m) = Y(j) * X(m);
      }
    v.noalias() = codazzi * (xy - yx);
    v -= tb * (gT.dot(X) * Y - gT.dot(Y) * X);
    r.codazzi = std::max(r.codazzi, g_norm(g, v));
  }

  // Gauss equation on orthonormal-frame components.
  const auto R = bundle.riemann.transformed(frame);
  const Vec tf = frame.transpose() * g * T;
  const Mat Sf = 0.5 * (S + S.transpose());  // Sf(a,b) = <A e_a, e_b>
  auto delta = [](int p, int q) { return p == q ? 1.0 : 0.0; };
  // Both sides are antisymmetric in (a,b) and in (c,d).
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = c + 1; d < n; ++d) {
          const double rhs = inv.a * (delta(a, c) * delta(b, d) - delta(b, c) * delta(a, d)) +
                             inv.b * (delta(a, c) * tf(b) * tf(d) - delta(b, c) * tf(a) * tf(d) -
                                      delta(a, d) * tf(b) * tf(c) + delta(b, d) * tf(a) * tf(c)) +
                             Sf(b, c) * Sf(a, d) - Sf(b, d) * Sf(a, c);
          r.gauss = std::max(r.gauss, std::abs(R(a, b, c, d) - rhs));
        }
  return r;
}

ResidualReport structure_residuals(const StructureData& data, const SampleGrid& grid, const CheckConfig& config) {
  const StructureEvaluator eval(data, config);
  OracleConfig oc = config.oracle;
  oc.compute_weyl = false;
  StructurePointResiduals worst;
  for (const auto& x : grid.points) {
    const auto bundle = curvature_oracle(data.metric, x, oc);
    const auto r = eval.at(x, bundle);
    worst.self_adjoint = std::max(worst.self_adjoint, r.self_adjoint);
    worst.unit_decomposition = std::max(worst.unit_decomposition, r.unit_decomposition);
    worst.tangent_hessian = std::max(worst.tangent_hessian, r.tangent_hessian);
    worst.angle_gradient = std::max(worst.angle_gradient, r.angle_gradient);
    worst.codazzi = std::max(worst.codazzi, r.codazzi);
    worst.gauss = std::max(worst.gauss, r.gauss);
    worst.t_gradient = std::max(worst.t_gradient, r.t_gradient);
  }
  const auto& tol = config.tolerances;
  ResidualReport rep;
  rep.orientation = orientation_name(data.orientation);
  const auto& gd = grid.description;
  rep.add("A_self_adjoint", worst.self_adjoint, tol.get("A_self_adjoint"), gd);
  rep.add("B_unit_decomposition", worst.unit_decomposition, tol.get("B_unit_decomposition"), gd);
  rep.add("C_tangent_hessian", worst.tangent_hessian, tol.get("C_tangent_hessian"), gd);
  rep.add("D_angle_gradient", worst.angle_gradient, tol.get("D_angle_gradient"), gd);
  rep.add("E_codazzi", worst.codazzi, tol.get("E_codazzi"), gd);
  rep.add("F_gauss", worst.gauss, tol.get("F_gauss"), gd);
  rep.add("T_gradient_of_height", worst.t_gradient, tol.get("T_gradient_of_height"), gd);
  rep.note("(C), (D): coordinate frame plus " + std::to_string(config.random_directions) +
           " random directions; (E): coordinate pairs plus " + std::to_string(config.random_directions) +
           " random pairs; (F): all orthonormal-frame components");
  return rep;
}

// ---- Ricci -------------------------------------------------------------------

double ricci_via_corollary(const StructureData& data, const Vec& x, const Vec& X, const Vec& Y) {
  const Mat g = data.metric(x);
  return ricci_corollary_at(data, g, data.shape(x), data.tangent(x), data.height(x), X, Y);
}

double einstein_defect(const CurvatureBundle<double>& bundle, double rho) {
  const Mat ric = ricci_in_frame(bundle);
  return (ric - rho * Mat::Identity(bundle.dim, bundle.dim)).cwiseAbs().maxCoeff();
}

ResidualReport einstein_residual(const CoordinateMetric<double>& metric, double rho, const SampleGrid& grid,
                                 const CheckConfig& config) {
  OracleConfig oc = config.oracle;
  oc.compute_weyl = false;
  double worst = 0.0;
  for (const auto& x : grid.points) worst = std::max(worst, einstein_defect(curvature_oracle(metric, x, oc), rho));
  ResidualReport rep;
  rep.add("einstein_residual", worst, config.tolerances.get("einstein_residual"), grid.description);
  return rep;
}

double corollary_defect(const StructureData& data, const Vec& x, const CurvatureBundle<double>& bundle) {
  const int n = data.dim();
  const Mat& g = bundle.metric;
  const Mat& frame = bundle.frame;
  const Mat ric = frame.transpose() * bundle.ricci * frame;
  const Mat A = data.shape(x);
  const Vec T = data.tangent(x);
  const auto inv = ambient_invariants(data.f, data.c, data.height(x));
  const double tn2 = g_dot(g, T, T);
  const Mat gA = g * A;
  const Mat AE = A * frame;
  // frame components of <X,Y>, <X,T><Y,T>, <AX,Y> and <AX,AY>
  const Vec tf = frame.transpose() * g * T;
  const Mat axy = AE.transpose() * g * frame;
  const Mat axay = AE.transpose() * gA * frame;
  const Mat cor = -((n - 1) * inv.a + tn2 * inv.b) * Mat::Identity(n, n) - (n - 2) * inv.b * tf * tf.transpose() +
                  A.trace() * axy - axay;
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) worst = std::max(worst, std::abs(ric(a, b) - cor(a, b)));
  return worst;
}

ResidualReport corollary_agreement(const StructureData& data, const SampleGrid& grid, const CheckConfig& config) {
  OracleConfig oc = config.oracle;
  oc.compute_weyl = false;
  double worst = 0.0;
  for (const auto& x : grid.points) {
    worst = std::max(worst, corollary_defect(data, x, curvature_oracle(data.metric, x, oc)));
  }
  ResidualReport rep;
  rep.orientation = orientation_name(data.orientation);
  rep.add("ricci_corollary_agreement", worst, config.tolerances.get("ricci_corollary_agreement"), grid.description);
  return rep;
}

// ---- principal curvatures -----------------------------------------------

double PrincipalSpectrum::trace() const {
  double acc = 0.0;
  for (const auto& c : clusters) acc += c.multiplicity * c.value;
  return acc;
}

PrincipalSpectrum principal_decomposition(const Mat& shape, const Mat& g, double cluster_tol, const Vec* tangent) {
  const int n = static_cast<int>(g.rows());
  if (shape.rows() != n || shape.cols() != n) throw ShapeError("shape operator and metric sizes differ");
  Mat S = g * shape;
  S = 0.5 * (S + S.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(S, g);
  if (es.info() != Eigen::Success) throw SingularityError("generalised eigenproblem failed");
  const Vec& values = es.eigenvalues();
  const Mat& vectors = es.eigenvectors();

  PrincipalSpectrum out;
  out.dim = n;
  out.tolerance = cluster_tol > 0.0 ? cluster_tol : 1e-6 * (1.0 + values.cwiseAbs().maxCoeff());
  int start = 0;
  for (int k = 1; k <= n; ++k) {
    if (k == n || values(k) - values(k - 1) > out.tolerance) {
      PrincipalCluster c;
      c.multiplicity = k - start;
      c.value = values.segment(start, c.multiplicity).mean();
      c.basis = vectors.middleCols(start, c.multiplicity);
      out.clusters.push_back(std::move(c));
      start = k;
    }
  }
  out.classification_violation = out.clusters.size() > 3;
  for (std::size_t q = 1; q < out.clusters.size(); ++q) {
    if (out.clusters[q].value - out.clusters[q - 1].value <= 10.0 * out.tolerance) out.well_separated = false;
  }
  if (tangent != nullptr && g_norm(g, *tangent) > 1e-12) out.t_cluster = cluster_containing(out, g, *tangent);
  return out;
}

PrincipalSpectrum principal_decomposition(const StructureData& data, const Vec& x, double cluster_tol) {
  const Mat g = data.metric(x);
  const Vec T = data.tangent(x);
  return principal_decomposition(data.shape(x), g, cluster_tol, &T);
}

int cluster_containing(const PrincipalSpectrum& spectrum, const Mat& g, const Vec& v) {
  int best = -1;
  double best_share = -1.0;
  const Vec gv = g * v;
  for (std::size_t q = 0; q < spectrum.clusters.size(); ++q) {
    const double share = (spectrum.clusters[q].basis.transpose() * gv).squaredNorm();
    if (share > best_share) {
      best_share = share;
      best = static_cast<int>(q);
    }
  }
  return best;
}

LabelledSpectrum label_spectrum(const PrincipalSpectrum& spectrum) {
  if (spectrum.clusters.size() > 3) throw ShapeError("more than three principal curvatures");
  if (spectrum.t_cluster < 0) throw ShapeError("no principal direction carries T");
  LabelledSpectrum out;
  out.dim = spectrum.dim;
  out.trace = spectrum.trace();
  const auto& tc = spectrum.clusters[static_cast<std::size_t>(spectrum.t_cluster)];
  out.lambda_n = tc.value;
  std::vector<std::pair<double, int>> rest;
  for (std::size_t q = 0; q < spectrum.clusters.size(); ++q) {
    const auto& c = spectrum.clusters[q];
    const int m = static_cast<int>(q) == spectrum.t_cluster ? c.multiplicity - 1 : c.multiplicity;
    if (m > 0) rest.emplace_back(c.value, m);
  }
  std::sort(rest.begin(), rest.end());
  if (rest.size() > 2) throw ShapeError("more than two principal curvatures besides lambda_n");
  if (!rest.empty()) {
    out.lambda_1 = rest[0].first;
    out.p1 = rest[0].second;
  }
  if (rest.size() == 2) {
    out.lambda_2 = rest[1].first;
    out.p2 = rest[1].second;
  }
  return out;
}

double check_T_principal(const StructureData& data, const Vec& x) {
  const Mat g = data.metric(x);
  const Vec T = data.tangent(x);
  const double tn2 = g_dot(g, T, T);
  if (!(tn2 > 1e-24)) throw ShapeError("T vanishes at the point; its direction is undefined");
  const Vec AT = data.shape(x) * T;
  return g_norm(g, AT - (g_dot(g, AT, T) / tn2) * T) / std::sqrt(tn2);
}

ResidualReport check_quadratics(const PrincipalSpectrum& spectrum, double rho, double a, double b, double tnorm2,
                                const Tolerances& tol) {
  const auto L = label_spectrum(spectrum);
  const int n = L.dim;
  const double nH = L.trace;
  auto eq1 = [&](double y) { return std::abs(y * y - nH * y + rho + (n - 1) * a + tnorm2 * b); };
  ResidualReport rep;
  rep.add("eq1_lambda1", eq1(L.lambda_1), tol.get("eq1_lambda1"));
  if (L.p2 > 0) rep.add("eq1_lambda2", eq1(L.lambda_2), tol.get("eq1_lambda2"));
  rep.add("eq2_lambda_n",
          std::abs(L.lambda_n * L.lambda_n - nH * L.lambda_n + rho + (n - 1) * (a + tnorm2 * b)),
          tol.get("eq2_lambda_n"));
  return rep;
}

ResidualReport check_multiplicity_laws(const PrincipalSpectrum& spectrum, double b, double tnorm2, int n,
                                       const Tolerances& tol) {
  const auto L = label_spectrum(spectrum);
  if (L.dim != n) throw ShapeError("spectrum dimension does not match n");
  if (std::abs(L.lambda_n) > spectrum.tolerance) {
    throw ConstraintError("multiplicity laws need lambda_n = 0, got " + std::to_string(L.lambda_n));
  }
  ResidualReport rep;
  const double l1 = L.lambda_1, l2 = L.lambda_2;
  if (std::abs(b) < 1e-12) {
    rep.note("b = 0: constant-curvature ambient, multiplicity laws do not apply");
    return rep;
  }
  if (b > 0.0) {
    const bool ok = L.p1 >= 2 && L.p2 >= 2;
    rep.add("branch_consistency", ok ? 0.0 : 1.0, tol.get("branch_consistency"));
    if (!ok) {
      rep.flag("classification violation: b > 0 needs both multiplicities >= 2, got p1 = " + std::to_string(L.p1) +
               ", p2 = " + std::to_string(L.p2));
    }
    rep.add("intsyst_product", std::abs(l1 * l2 + (n - 2) * tnorm2 * b), tol.get("intsyst_product"));
    rep.add("intsyst_sum", std::abs((L.p1 - 1) * l1 + (L.p2 - 1) * l2), tol.get("intsyst_sum"));
    if (ok) {
      const double r1 = std::abs(l1 * l1 - double(L.p2 - 1) * (n - 2) / (L.p1 - 1) * tnorm2 * b);
      const double r2 = std::abs(l2 * l2 - double(L.p1 - 1) * (n - 2) / (L.p2 - 1) * tnorm2 * b);
      rep.add("lambda_squares", std::max(r1, r2), tol.get("lambda_squares"));
    } else {
      rep.note("lambda_squares skipped: a multiplicity below 2");
    }
  } else {
    const bool ok = L.p1 == n - 1 && L.p2 == 0;
    rep.add("branch_consistency", ok ? 0.0 : 1.0, tol.get("branch_consistency"));
    if (!ok) {
      rep.flag("classification violation: b < 0 needs a single eigenvalue of multiplicity n - 1 besides lambda_n");
    }
    rep.add("lambda_squares", std::abs(l1 * l1 + tnorm2 * b), tol.get("lambda_squares"));
  }
  return rep;
}

// ---- gradient of theta and geodesics -----------------------------------------

ResidualReport check_theta_gradient(const StructureData& data, const SampleGrid& grid, const CheckConfig& config) {
  const int n = data.dim();
  const double h = config.oracle.step;
  const bool rich = config.oracle.richardson;
  const auto& box = data.metric.domain();
  auto unit_tangent = [&](const Vec& y) -> Vec {
    const Mat g = data.metric(y);
    const Vec T = data.tangent(y);
    const double norm = g_norm(g, T);
    if (!(norm > 1e-12)) throw ShapeError("T vanishes along the curve");
    return T / norm;
  };
  double grad_worst = 0.0, geo_worst = 0.0;
  std::size_t covered = 0, truncated = 0;
  for (const auto& x : grid.points) {
    const Mat g = data.metric(x);
    const Vec T = data.tangent(x);
    const double tn2 = g_dot(g, T, T);
    if (!(tn2 > 1e-24)) continue;
    ++covered;
    const Mat A = data.shape(x);
    const double theta = data.angle(x);
    const double lambda_n = g_dot(g, A * T, T) / tn2;
    Vec dtheta(n);
    for (int j = 0; j < n; ++j) dtheta(j) = partial(data.angle, x, j, h, rich);
    const Vec grad = g.ldlt().solve(dtheta);
    const double fpf = fp_over_f(data.f, data.height(x));
    grad_worst = std::max(grad_worst, g_norm(g, grad + (lambda_n + fpf * theta) * T));

    // nabla_U U along the integral curve of U = T/|T| through x (RK4).
    Vec y = x;
    for (int step = 0; step <= config.geodesic_steps; ++step) {
      if (!box.contains(y, config.oracle.margin())) {
        ++truncated;
        break;
      }
      Vec U;
      try {
        U = unit_tangent(y);
      } catch (const ShapeError&) {
        ++truncated;
        break;
      }
      const auto gamma = christoffel_symbols(data.metric, y, config.oracle);
      Vec acc = Vec::Zero(n);
      for (int j = 0; j < n; ++j) acc += U(j) * partial(unit_tangent, y, j, h, rich);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc(k) += gamma[(static_cast<std::size_t>(k) * n + i) * n + j] * U(i) * U(j);
      geo_worst = std::max(geo_worst, g_norm(data.metric(y), acc));
      if (step == config.geodesic_steps) break;
      const double ds = config.geodesic_step;
      try {
        const Vec k1 = U;
        const Vec k2 = unit_tangent(y + 0.5 * ds * k1);
        const Vec k3 = unit_tangent(y + 0.5 * ds * k2);
        const Vec k4 = unit_tangent(y + ds * k3);
        y += ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      } catch (const Error&) {
        ++truncated;
        break;
      }
    }
  }
  if (covered == 0) throw ShapeError("T vanishes on the whole grid; the theta-gradient check needs T != 0");
  ResidualReport rep;
  rep.orientation = orientation_name(data.orientation);
  std::ostringstream gd;
  gd << grid.description << "; " << covered << "/" << grid.size() << " points with T != 0";
  rep.add("theta_gradient", grad_worst, config.tolerances.get("theta_gradient"), gd.str());
  rep.add("T_geodesic", geo_worst, config.tolerances.get("T_geodesic"),
          gd.str() + "; curves of " + std::to_string(config.geodesic_steps) + " RK4 steps of " +
              std::to_string(config.geodesic_step));
  if (covered < grid.size()) rep.note(std::to_string(grid.size() - covered) + " grid points skipped: T = 0");
  if (truncated > 0) rep.note("truncated-curve warning: " + std::to_string(truncated) + " curves left the domain early");
  return rep;
}

// ---- warped decomposition identities -----------------------------------------

ResidualReport check_log_derivative_link(const StructureData& data, const MWPSpec& spec, const SampleGrid& grid,
                                         const CheckConfig& config) {
  std::vector<double> worst(spec.fibers.size(), 0.0);
  std::size_t covered = 0;
  for (const auto& x : grid.points) {
    const Mat g = data.metric(x);
    const Vec T = data.tangent(x);
    const double tn = g_norm(g, T);
    if (!(tn > 1e-12)) continue;
    ++covered;
    const auto spectrum = principal_decomposition(data.shape(x), g, config.cluster_tol, &T);
    const double theta = data.angle(x);
    const auto fj = eval_with_derivatives(data.f, data.height(x), 1);
    for (std::size_t i = 0; i < spec.fibers.size(); ++i) {
      const int q = cluster_containing(spectrum, g, Vec::Unit(data.dim(), spec.fiber_offset(i)));
      const double lambda = spectrum.clusters[static_cast<std::size_t>(q)].value;
      const auto pj = eval_with_derivatives(spec.fibers[i].warping, x(0), 1);
      const double r = pj[1] / pj[0] - fj[1] / (tn * fj[0]) - theta * lambda / tn;
      worst[i] = std::max(worst[i], std::abs(r));
    }
  }
  ResidualReport rep;
  rep.orientation = orientation_name(data.orientation);
  const std::string gd =
      grid.description + "; " + std::to_string(covered) + "/" + std::to_string(grid.size()) + " points with T != 0";
  for (std::size_t i = 0; i < worst.size(); ++i) {
    const std::string name = "log_derivative" + fiber_suffix(i);
    rep.add(name, worst[i], config.tolerances.get(name), gd);
  }
  if (covered < grid.size()) rep.note(std::to_string(grid.size() - covered) + " grid points skipped: T = 0");
  return rep;
}

SliceQuantities slice_quantities(const StructureData& data, const MWPSpec& spec, const Vec& x,
                                 const CheckConfig& config) {
  const Mat g = data.metric(x);
  const Vec T = data.tangent(x);
  const auto spectrum = principal_decomposition(data.shape(x), g, config.cluster_tol, &T);
  if (spectrum.t_cluster < 0) throw ShapeError("T vanishes; lambda_n is undefined");
  SliceQuantities out;
  out.s = x(0);
  out.lambda_n = spectrum.clusters[static_cast<std::size_t>(spectrum.t_cluster)].value;
  for (std::size_t i = 0; i < spec.fibers.size(); ++i) {
    const int q = cluster_containing(spectrum, g, Vec::Unit(data.dim(), spec.fiber_offset(i)));
    out.lambda.push_back(spectrum.clusters[static_cast<std::size_t>(q)].value);
  }
  const auto inv = ambient_invariants(data.f, data.c, data.height(x));
  out.a = inv.a;
  out.b = inv.b;
  out.tnorm2 = g_dot(g, T, T);
  return out;
}

ResidualReport check_id_system(const MWPSpec& spec, const std::vector<SliceQuantities>& slices,
                               const Tolerances& tol) {
  if (spec.fibers.size() != 2) throw ShapeError("the id system needs two fibers");
  double id1[2] = {0, 0}, id2[2] = {0, 0}, id3 = 0;
  double s_lo = std::numeric_limits<double>::infinity(), s_hi = -s_lo;
  for (const auto& q : slices) {
    if (q.lambda.size() != 2) throw ShapeError("slice quantities need two fiber eigenvalues");
    s_lo = std::min(s_lo, q.s);
    s_hi = std::max(s_hi, q.s);
    std::vector<double> p[2];
    for (int i = 0; i < 2; ++i) {
      p[i] = eval_with_derivatives(spec.fibers[static_cast<std::size_t>(i)].warping, q.s, 2);
      const double li = q.lambda[static_cast<std::size_t>(i)];
      id1[i] = std::max(id1[i], std::abs(p[i][2] - (q.a + q.b * q.tnorm2 - li * q.lambda_n) * p[i][0]));
      id2[i] = std::max(id2[i], std::abs(p[i][1] * p[i][1] + (li * li - q.a) * p[i][0] * p[i][0] -
                                         spec.fibers[static_cast<std::size_t>(i)].curvature()));
    }
    id3 = std::max(id3, std::abs(p[0][1] * p[1][1] - (q.a - q.lambda[0] * q.lambda[1]) * p[0][0] * p[1][0]));
  }
  std::ostringstream gd;
  gd << slices.size() << " slices, s in [" << s_lo << ", " << s_hi << "]";
  ResidualReport rep;
  for (int i = 0; i < 2; ++i) {
    const std::string sfx = fiber_suffix(static_cast<std::size_t>(i));
    rep.add("id1" + sfx, id1[i], tol.get("id1" + sfx), gd.str());
    if (spec.fibers[static_cast<std::size_t>(i)].dim() > 1) {
      rep.add("id2" + sfx, id2[i], tol.get("id2" + sfx), gd.str());
    } else {
      rep.note("id2" + sfx + " skipped: fiber " + std::to_string(i + 1) + " is one-dimensional");
    }
  }
  rep.add("id3", id3, tol.get("id3"), gd.str());
  return rep;
}

// ---- involutivity -----------------------------------------------------------

Vec lie_bracket(const std::function<Vec(const Vec&)>& X, const std::function<Vec(const Vec&)>& Y, const Vec& x,
                double h, bool richardson) {
  const int n = static_cast<int>(x.size());
  const Vec xv = X(x), yv = Y(x);
  Vec out = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    out += xv(j) * partial(Y, x, j, h, richardson);
    out -= yv(j) * partial(X, x, j, h, richardson);
  }
  return out;
}

double involutivity_residual(const StructureData& data, int cluster, const Vec& x, const CheckConfig& config) {
  if (cluster != 1 && cluster != 2) throw ShapeError("cluster index must be 1 or 2");
  if (!data.metric.domain().contains(x, config.oracle.margin())) {
    throw MarginError("point closer than the stencil margin to the domain boundary");
  }
  const int n = data.dim();
  const Mat g = data.metric(x);
  const Vec T = data.tangent(x);
  const auto spectrum = principal_decomposition(data.shape(x), g, config.cluster_tol, &T);
  const auto L = label_spectrum(spectrum);
  const double lambda = cluster == 1 ? L.lambda_1 : L.lambda_2;
  const int p = cluster == 1 ? L.p1 : L.p2;
  if (p < 2) return 0.0;

  // The other eigenvalues, as functions of the point, in a fixed role.
  auto others_at = [&](const PrincipalSpectrum& sp) {
    const auto l = label_spectrum(sp);
    std::vector<double> out{l.lambda_n};
    if ((cluster == 1 ? l.p2 : l.p1) > 0) out.push_back(cluster == 1 ? l.lambda_2 : l.lambda_1);
    return out;
  };
  const auto others = others_at(spectrum);
  for (double mu : others) {
    if (std::abs(mu - lambda) <= 10.0 * spectrum.tolerance) {
      throw IllConditionedError("lambda_" + std::to_string(cluster) + " is not separated from the other eigenvalues");
    }
  }
  int target = -1;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < spectrum.clusters.size(); ++q) {
    if (static_cast<int>(q) == spectrum.t_cluster) continue;
    const double d = std::abs(spectrum.clusters[q].value - lambda);
    if (d < gap) {
      gap = d;
      target = static_cast<int>(q);
    }
  }
  const Mat basis = spectrum.clusters[static_cast<std::size_t>(target)].basis;

  auto projector_product = [&](const Vec& y) -> Mat {
    const Mat gy = data.metric(y);
    const Vec Ty = data.tangent(y);
    const Mat Ay = data.shape(y);
    const auto mus = others_at(principal_decomposition(Ay, gy, config.cluster_tol, &Ty));
    Mat P = Mat::Identity(n, n);
    for (double mu : mus) P = P * (Ay - mu * Mat::Identity(n, n));
    return P;
  };
  Mat proj = Mat::Identity(n, n);
  {
    const Mat A = data.shape(x);
    for (double mu : others) proj = proj * (A - mu * Mat::Identity(n, n)) / (lambda - mu);
  }
  const Mat complement = Mat::Identity(n, n) - proj;

  double worst = 0.0;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) {
      const Vec ea = basis.col(a), eb = basis.col(b);
      std::function<Vec(const Vec&)> Fa = [&, ea](const Vec& y) -> Vec { return projector_product(y) * ea; };
      std::function<Vec(const Vec&)> Fb = [&, eb](const Vec& y) -> Vec { return projector_product(y) * eb; };
      const Vec br = lie_bracket(Fa, Fb, x, config.oracle.step, config.oracle.richardson);
      const double scale = g_norm(g, Fa(x)) * g_norm(g, Fb(x));
      worst = std::max(worst, g_norm(g, complement * br) / scale);
    }
  return worst;
}

}  // namespace einhyp
