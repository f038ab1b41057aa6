#include "kahler_lens/calculus.hpp"

#include <cmath>

#include "kahler_lens/finite_difference.hpp"

namespace kahler {

void FDScheme::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("finite-difference step must be positive");
  if (order != 2 && order != 4) throw Error("finite-difference order must be 2 or 4");
}

double FDScheme::reach() const { return fd::reach(order) * h; }

nlohmann::json FDScheme::to_json() const {
  return {{"h", h}, {"order", order}, {"richardson", richardson}};
}

ScalarField guarded(const Immersion& f, ScalarField field) {
  return [&f, field = std::move(field)](const Vector& x) {
    f.require_admissible(x);
    return field(x);
  };
}

Vector fd_differential(const ScalarField& field, const Immersion& f, const Vector& p,
                       const FDScheme& scheme) {
  scheme.validate();
  const ScalarField g = guarded(f, field);
  Vector out(p.size());
  for (int k = 0; k < p.size(); ++k) out[k] = fd::partial(g, p, k, scheme.h, scheme.order);
  return out;
}

namespace {

double laplacian_once(const ScalarField& field, const Immersion& f, const Vector& p, double h,
                      int order) {
  const int m = static_cast<int>(p.size());
  const FDScheme inner{h, order, false};
  auto flux = [&](const Vector& x) -> Vector {
    f.require_admissible(x);
    const Matrix g = induced_metric(f, x);
    const Vector grad = fd_differential(field, f, x, inner);
    return std::sqrt(g.determinant()) * g.ldlt().solve(grad);
  };
  double div = 0.0;
  for (int i = 0; i < m; ++i) div += fd::partial(flux, p, i, h, order)[i];
  return div / std::sqrt(induced_metric(f, p).determinant());
}

Matrix lowdin(const Matrix& vs) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(vs.transpose() * vs);
  if (es.eigenvalues().minCoeff() < 1e-6)
    throw FrameContinuationError("continued frame vectors became dependent");
  return vs * es.operatorInverseSqrt();
}

}  // namespace

double laplace_beltrami(const ScalarField& field, const Immersion& f, const Vector& p,
                        const FDScheme& scheme) {
  scheme.validate();
  const double coarse = laplacian_once(field, f, p, scheme.h, scheme.order);
  if (!scheme.richardson) return coarse;
  const double fine = laplacian_once(field, f, p, scheme.h / 2, scheme.order);
  const double w = std::pow(2.0, scheme.order);
  return (w * fine - coarse) / (w - 1.0);
}

StratumCheck check_stratum(const Immersion& f, const Vector& p, double radius,
                           const AngleOptions& options, double nonzero_margin,
                           double complex_margin) {
  const int m = static_cast<int>(p.size());
  std::vector<Vector> samples{p};
  for (int i = 0; i < m; ++i)
    for (double t : {radius, -radius, radius / 2, -radius / 2}) {
      Vector x = p;
      x[i] += t;
      samples.push_back(x);
    }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Vector x = p;
          x[i] += si * radius;
          x[j] += sj * radius;
          samples.push_back(x);
        }

  StratumCheck out;
  bool first = true;
  Matrix j_base;
  for (const Vector& x : samples) {
    f.require_admissible(x);
    AngleSpectrum s;
    try {
      s = kahler_angles(f, x, options);
    } catch (const DegenerateSpectrumError& e) {
      out.interior = false;
      out.reason = std::string("spectrum not resolvable on the stencil: ") + e.what();
      return out;
    }
    if (first) {
      out.rank = s.rank;
      j_base = s.j_omega;
      first = false;
    } else if (s.rank != out.rank) {
      out.interior = false;
      out.reason = "rank changes on the stencil (" + std::to_string(2 * out.rank) + " -> " +
                   std::to_string(2 * s.rank) + ")";
      return out;
    }
    if (s.rank > 0 &&
        (s.j_omega - j_base).cwiseAbs().maxCoeff() > 0.5 * j_base.cwiseAbs().maxCoeff()) {
      out.interior = false;
      out.reason = "J_w jumps on the stencil (F*w passes through a degenerate point)";
      return out;
    }
    for (int a = 0; a < s.n(); ++a) {
      out.max_cosine = std::max(out.max_cosine, s.cosines[a]);
      if (a < s.rank) out.min_nonzero_cosine = std::min(out.min_nonzero_cosine, s.cosines[a]);
    }
  }
  if (out.rank > 0 && out.min_nonzero_cosine < nonzero_margin) {
    out.interior = false;
    out.reason = "a nonzero cosine approaches 0 on the stencil";
  } else if (out.max_cosine > 1.0 - complex_margin) {
    out.interior = false;
    out.reason = "a complex direction is within the stencil";
  }
  return out;
}

FrameField::FrameField(const Immersion& f, const Vector& p0, const AngleOptions& options,
                       std::vector<double> rotations, double gap_tol)
    : f_(f), options_(options), gap_tol_(gap_tol), base_geometry_(point_geometry(f, p0, options.rank_tol)) {
  base_ = adapted_frame(base_geometry_, options, false, rotations);
  const PolarDecomposition polar = polar_decompose(pullback_form(base_geometry_), options.rank_tol);
  const int m = base_geometry_.m();
  int i = 0;
  while (i < polar.rank) {
    int j = i + 2;
    while (j < polar.rank && polar.singular_values[i] - polar.singular_values[j] < options.cluster_tol)
      j += 2;
    clusters_.push_back({i, j, false});
    i = j;
  }
  if (polar.rank < m) clusters_.push_back({polar.rank, m, true});
}

Matrix FrameField::at(const Vector& p) const {
  const PolarDecomposition polar = polar_decompose(pullback_form(f_, p), options_.rank_tol);
  const int m = static_cast<int>(p.size());
  if (polar.rank != base_.rank * 2)
    throw FrameContinuationError("rank of F*w changes between the base point and the stencil");
  const Vector& sv = polar.singular_values;
  const Matrix x0 = polar.gauge * base_.real_frame;
  Matrix q(m, m);
  for (const Cluster& c : clusters_) {
    if (c.begin > 0 && sv[c.begin - 1] - sv[c.begin] < gap_tol_)
      throw FrameContinuationError("eigenvalue clusters of g~ collide on the stencil");
    if (c.end < m && sv[c.end - 1] - sv[c.end] < gap_tol_)
      throw FrameContinuationError("eigenvalue clusters of g~ collide on the stencil");
    const int w = c.end - c.begin;
    const Matrix basis = polar.eigvecs.middleCols(c.begin, w);
    const Matrix proj = basis * basis.transpose();
    Matrix vs(m, w);
    if (c.kernel) {
      vs = proj * x0.middleCols(c.begin, w);
    } else {
      for (int a = 0; a < w / 2; ++a) {
        const Vector x = proj * x0.col(c.begin + 2 * a);
        vs.col(2 * a) = x;
        vs.col(2 * a + 1) = polar.j_gauge * x;
      }
    }
    q.middleCols(c.begin, w) = lowdin(vs);
  }
  return polar.gauge_inv * q;
}

namespace {

FrameConnection connection_from(const Immersion& f, const std::function<Matrix(const Vector&)>& field,
                                const Vector& p0, const FDScheme& scheme) {
  scheme.validate();
  const int m = static_cast<int>(p0.size());
  const int n = m / 2;
  const Matrix e = field(p0);
  const Matrix g = induced_metric(f, p0);
  const Tensor3 gamma = induced_christoffel(f, p0);
  auto guarded_field = [&](const Vector& x) -> Matrix {
    f.require_admissible(x);
    return field(x);
  };

  FrameConnection out;
  for (int k = 0; k < m; ++k) {
    Matrix nabla = fd::partial(guarded_field, p0, k, scheme.h, scheme.order);
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < m; ++l) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += gamma(l, k, a) * e(a, i);
        nabla(l, i) += s;
      }
    const Matrix c = nabla.transpose() * g * e;
    out.antisymmetry_residual = std::max(out.antisymmetry_residual, (c + c.transpose()).cwiseAbs().maxCoeff());
    out.real.push_back(c);
  }
  const CMatrix zc = complex_frame_coefficients(m);
  const CMatrix zchart = e.cast<Complex>() * zc;
  for (int a = 0; a < 2 * n; ++a) {
    CMatrix ca = CMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < m; ++k) ca += zchart(k, a) * (zc.transpose() * out.real[k].cast<Complex>() * zc);
    out.complex_.push_back(ca);
  }
  return out;
}

}  // namespace

FrameConnection frame_connection_coeffs(const Immersion& f, const FrameField& field, const Vector& p0,
                                        const FDScheme& scheme) {
  return connection_from(f, [&field](const Vector& x) { return field.at(x); }, p0, scheme);
}

FrameConnection frame_connection_coeffs(const Immersion& f,
                                        const std::function<Matrix(const Vector&)>& field,
                                        const Vector& p0, const FDScheme& scheme) {
  return connection_from(f, field, p0, scheme);
}

Complex sff_j_pairing(const PointGeometry& pg, const CVector& a, const CVector& b, const CVector& c) {
  const CVector jdf = (pg.j * pg.jet.df).cast<Complex>() * c;
  const CVector bv = pg.sff_apply(a, b);
  return (bv.transpose() * pg.g.cast<Complex>() * jdf)(0, 0);
}

Complex covariant_deriv_pullback(const PointGeometry& pg, const CVector& z, const CVector& x,
                                 const CVector& y) {
  return -sff_j_pairing(pg, z, x, y) + sff_j_pairing(pg, z, y, x);
}

double covariant_deriv_pullback(const Immersion& f, const Vector& p, const Vector& z, const Vector& x,
                                const Vector& y) {
  const PointGeometry pg = point_geometry(f, p);
  return covariant_deriv_pullback(pg, z.cast<Complex>(), x.cast<Complex>(), y.cast<Complex>()).real();
}

Tensor3 covariant_deriv_pullback_tensor(const PointGeometry& pg) {
  const int m = pg.m();
  const int nn = pg.ambient_dim();
  const Matrix jdf = pg.g * pg.j * pg.jet.df;  // g(·, J dF e_b) as covectors
  Tensor3 out(m, m, m);
  for (int k = 0; k < m; ++k)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = 0.0;
        for (int l = 0; l < nn; ++l) s += -pg.sff(l, k, a) * jdf(l, b) + pg.sff(l, k, b) * jdf(l, a);
        out(k, a, b) = s;
      }
  return out;
}

Tensor3 covariant_deriv_pullback_fd(const Immersion& f, const Vector& p, const FDScheme& scheme) {
  scheme.validate();
  const int m = static_cast<int>(p.size());
  auto form = [&](const Vector& x) -> Matrix {
    f.require_admissible(x);
    return pullback_form(f, x).form;
  };
  const Matrix w = form(p);
  const Tensor3 gamma = induced_christoffel(f, p);
  Tensor3 out(m, m, m);
  for (int k = 0; k < m; ++k) {
    const Matrix dw = fd::partial(form, p, k, scheme.h, scheme.order);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = dw(a, b);
        for (int l = 0; l < m; ++l) s -= gamma(l, k, a) * w(l, b) + gamma(l, k, b) * w(a, l);
        out(k, a, b) = s;
      }
  }
  return out;
}

CurvatureTensor intrinsic_curvature_fd(const Immersion& f, const Vector& p, const FDScheme& scheme) {
  scheme.validate();
  auto gamma = [&](const Vector& x) -> Tensor3 {
    f.require_admissible(x);
    return induced_christoffel(f, x);
  };
  std::vector<Tensor3> dgamma;
  for (int k = 0; k < p.size(); ++k) dgamma.push_back(fd::partial(gamma, p, k, scheme.h, scheme.order));
  return curvature_from_connection(induced_metric(f, p), gamma(p), dgamma);
}

}  // namespace kahler
