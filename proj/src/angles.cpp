#include "kahler_lens/angles.hpp"

#include <algorithm>
#include <cmath>

namespace kahler {

PulledBackForm pullback_form(const Matrix& df, const Matrix& g, const Matrix& j) {
  PulledBackForm out;
  out.form = (j * df).transpose() * g * df;
  out.form = 0.5 * (out.form - out.form.transpose());
  out.g_m = df.transpose() * g * df;
  out.g_m = 0.5 * (out.g_m + out.g_m.transpose());
  // g_M(A X, Y) = X^T A^T g_M Y = form(X, Y)  =>  A = g_M^{-1} form^T
  out.op = out.g_m.ldlt().solve(out.form.transpose());
  return out;
}

PulledBackForm pullback_form(const PointGeometry& pg) {
  return pullback_form(pg.jet.df, pg.g, pg.j);
}

PulledBackForm pullback_form(const Immersion& f, const Vector& p) {
  return pullback_form(point_geometry(f, p));
}

PolarDecomposition polar_decompose(const Matrix& op, const Matrix& g_m, double rank_tol) {
  const int m = static_cast<int>(op.rows());
  PolarDecomposition out;
  const Eigen::LLT<Matrix> llt(g_m);
  if (llt.info() != Eigen::Success) throw DegenerateImmersionError("g_M is not positive definite", 0.0);
  out.gauge = llt.matrixU();
  out.gauge_inv = out.gauge.triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
  const Matrix as = out.gauge * op * out.gauge_inv;

  const Eigen::JacobiSVD<Matrix> svd(as, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  out.eigvecs = svd.matrixV();

  // Singular values of a skew operator come in pairs; the rank counts pairs.
  int pairs = 0;
  for (int i = 0; i + 1 < m; i += 2) {
    if (0.5 * (out.singular_values[i] + out.singular_values[i + 1]) > rank_tol) ++pairs;
  }
  out.rank = 2 * pairs;
  const int r = out.rank;

  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  out.j_gauge = u.leftCols(r) * v.leftCols(r).transpose();
  const Matrix gt_gauge = v * out.singular_values.asDiagonal() * v.transpose();

  out.g_tilde = out.gauge_inv * gt_gauge * out.gauge;
  out.j_omega = out.gauge_inv * out.j_gauge * out.gauge;
  out.kernel_basis = out.gauge_inv * v.rightCols(m - r);
  return out;
}

PolarDecomposition polar_decompose(const PulledBackForm& form, double rank_tol) {
  return polar_decompose(form.op, form.g_m, rank_tol);
}

nlohmann::json AngleSpectrum::to_json(double complex_tol) const {
  nlohmann::json j;
  j["cosines"] = std::vector<double>(cosines.data(), cosines.data() + cosines.size());
  j["rank"] = rank;
  try {
    j["kappa"] = kappa_from_cosines(cosines, complex_tol);
  } catch (const ComplexDirectionError&) {
    j["kappa"] = "undefined:complex";
  }
  return j;
}

namespace {

AngleSpectrum spectrum_from_polar(const PolarDecomposition& polar, const AngleOptions& options) {
  const int m = static_cast<int>(polar.singular_values.size());
  AngleSpectrum s;
  s.cosines.resize(m / 2);
  for (int a = 0; a < m / 2; ++a) {
    const double hi = polar.singular_values[2 * a], lo = polar.singular_values[2 * a + 1];
    s.pairing_residual = std::max(s.pairing_residual, hi - lo);
    s.cosines[a] = std::clamp(0.5 * (hi + lo), 0.0, 1.0);
  }
  if (s.pairing_residual > options.pairing_tol)
    throw DegenerateSpectrumError("singular values of F*w do not pair (residual " +
                                  std::to_string(s.pairing_residual) + ")");
  s.rank = polar.rank / 2;
  s.g_tilde = polar.g_tilde;
  s.j_omega = polar.j_omega;
  s.kernel_basis = polar.kernel_basis;
  return s;
}

}  // namespace

AngleSpectrum angle_spectrum(const PulledBackForm& form, const AngleOptions& options) {
  return spectrum_from_polar(polar_decompose(form, options.rank_tol), options);
}

AngleSpectrum kahler_angles(const Immersion& f, const Vector& p, const AngleOptions& options) {
  return angle_spectrum(pullback_form(f, p), options);
}

double kappa_from_cosines(const Vector& cosines, double complex_tol) {
  double k = 0.0;
  for (int a = 0; a < cosines.size(); ++a) {
    if (cosines[a] >= 1.0 - complex_tol)
      throw ComplexDirectionError("kappa is undefined at a complex direction (cos = " +
                                  std::to_string(cosines[a]) + ")");
    k += std::log1p(cosines[a]) - std::log1p(-cosines[a]);
  }
  return k;
}

double kappa_from_determinants(const PolarDecomposition& polar, double complex_tol) {
  const int m = static_cast<int>(polar.eigvecs.rows());
  if (polar.singular_values.size() > 0 && polar.singular_values[0] >= 1.0 - complex_tol)
    throw ComplexDirectionError("kappa is undefined at a complex direction");
  const Matrix gt = polar.eigvecs * polar.singular_values.asDiagonal() * polar.eigvecs.transpose();
  const Matrix id = Matrix::Identity(m, m);
  const double plus = (id + gt).determinant();
  const double minus = (id - gt).determinant();
  return 0.5 * std::log(plus / minus);
}

double kappa(const Immersion& f, const Vector& p, const AngleOptions& options) {
  return kappa_from_cosines(kahler_angles(f, p, options).cosines, options.complex_tol);
}

double determinant_identity_residual(const PolarDecomposition& polar, const Vector& cosines) {
  const int m = static_cast<int>(polar.eigvecs.rows());
  const Matrix gt = polar.eigvecs * polar.singular_values.asDiagonal() * polar.eigvecs.transpose();
  const Matrix id = Matrix::Identity(m, m);
  double prod_plus = 1.0, prod_minus = 1.0;
  for (int a = 0; a < cosines.size(); ++a) {
    prod_plus *= std::pow(1.0 + cosines[a], 2);
    prod_minus *= std::pow(1.0 - cosines[a], 2);
  }
  const double rp = std::abs((id + gt).determinant() - prod_plus) / prod_plus;
  const double rm = std::abs((id - gt).determinant() - prod_minus) / std::max(prod_minus, 1e-300);
  return std::max(rp, rm);
}

std::string to_string(DirectionLabel label) {
  switch (label) {
    case DirectionLabel::Complex: return "complex";
    case DirectionLabel::Lagrangian: return "lagrangian";
    case DirectionLabel::Intermediate: return "intermediate";
  }
  return "?";
}

DirectionClassification classify_directions(const Vector& cosines, double tol) {
  DirectionClassification out;
  int complex = 0, lagrangian = 0;
  for (int a = 0; a < cosines.size(); ++a) {
    DirectionLabel l = DirectionLabel::Intermediate;
    if (cosines[a] > 1.0 - tol) {
      l = DirectionLabel::Complex;
      ++complex;
    } else if (cosines[a] < tol) {
      l = DirectionLabel::Lagrangian;
      ++lagrangian;
    }
    out.labels.push_back(l);
  }
  const int n = static_cast<int>(cosines.size());
  out.has_complex = complex > 0;
  out.has_lagrangian = lagrangian > 0;
  out.is_complex_point = complex == n;
  out.is_lagrangian_point = lagrangian == n;
  return out;
}

DirectionClassification classify_directions(const Immersion& f, const Vector& p, double tol) {
  return classify_directions(kahler_angles(f, p).cosines, tol);
}

CMatrix complex_frame_coefficients(int m) {
  const int n = m / 2;
  CMatrix zc = CMatrix::Zero(m, 2 * n);
  for (int a = 0; a < n; ++a) {
    zc(2 * a, a) = 0.5;
    zc(2 * a + 1, a) = Complex(0.0, -0.5);
    zc(2 * a, n + a) = 0.5;
    zc(2 * a + 1, n + a) = Complex(0.0, 0.5);
  }
  return zc;
}

Matrix adapted_real_frame(const PolarDecomposition& polar, const AngleOptions& options,
                          const std::vector<double>& rotations) {
  const int m = static_cast<int>(polar.eigvecs.rows());
  const int r = polar.rank;
  const Matrix& v = polar.eigvecs;
  Matrix q(m, m);
  int filled = 0;

  // Nonzero part: clusters of (paired) singular values, J_ω-paired bases.
  int i = 0;
  while (i < r) {
    int j = i + 2;
    while (j < r && polar.singular_values[i] - polar.singular_values[j] < options.cluster_tol) j += 2;
    std::vector<Vector> basis;
    for (int c = i; c < j && static_cast<int>(basis.size()) < j - i; ++c) {
      Vector x = v.col(c);
      for (const auto& b : basis) x -= b.dot(x) * b;
      if (x.norm() < 1e-6) continue;
      x.normalize();
      Vector y = polar.j_gauge * x;
      y.normalize();
      basis.push_back(x);
      basis.push_back(y);
    }
    if (static_cast<int>(basis.size()) != j - i)
      throw DegenerateSpectrumError("could not build a J_w-adapted basis of an eigenspace");
    for (const auto& b : basis) q.col(filled++) = b;
    i = j;
  }
  // Kernel: any orthonormal basis; consecutive pairs fix the canonical J'.
  for (int c = r; c < m; ++c) q.col(filled++) = v.col(c);

  for (std::size_t a = 0; a < rotations.size() && 2 * static_cast<int>(a) + 1 < m; ++a) {
    const double t = rotations[a];
    const Vector x = q.col(2 * a), y = q.col(2 * a + 1);
    q.col(2 * a) = std::cos(t) * x + std::sin(t) * y;
    q.col(2 * a + 1) = std::cos(t) * y - std::sin(t) * x;
  }
  return polar.gauge_inv * q;
}

AdaptedFrame adapted_frame(const PointGeometry& pg, const AngleOptions& options,
                           bool require_normal_frame, const std::vector<double>& rotations) {
  const PulledBackForm form = pullback_form(pg);
  const PolarDecomposition polar = polar_decompose(form, options.rank_tol);
  const AngleSpectrum spec = spectrum_from_polar(polar, options);
  const int m = pg.m();
  const int n = m / 2;

  AdaptedFrame frame;
  frame.base_point = pg.p;
  frame.cosines = spec.cosines;
  frame.rank = spec.rank;
  frame.real_frame = adapted_real_frame(polar, options, rotations);
  frame.complex_frame = frame.real_frame.cast<Complex>() * complex_frame_coefficients(m);

  const bool complex_direction = spec.cosines.size() > 0 && spec.cosines[0] >= 1.0 - options.complex_tol;
  if (complex_direction) {
    if (require_normal_frame)
      throw ComplexDirectionError("U_a needs sin > 0 for every Kahler angle");
    return frame;
  }
  const CMatrix dfz = pg.jet.df.cast<Complex>() * frame.complex_frame;
  const CMatrix jdfz = pg.j.cast<Complex>() * dfz;
  const CMatrix proj = pg.projection.cast<Complex>();
  CMatrix u(pg.ambient_dim(), 2 * n);
  for (int a = 0; a < n; ++a) {
    const double s = std::sqrt(1.0 - spec.cosines[a] * spec.cosines[a]);
    u.col(a) = proj * jdfz.col(a) / s;
    u.col(n + a) = u.col(a).conjugate();
  }
  frame.normal_frame = u;
  return frame;
}

AdaptedFrame adapted_frame(const Immersion& f, const Vector& p, const AngleOptions& options,
                           bool require_normal_frame) {
  return adapted_frame(point_geometry(f, p, options.rank_tol), options, require_normal_frame);
}

double normal_frame_gram_determinant(const PointGeometry& pg, const AdaptedFrame& frame) {
  if (!frame.normal_frame) return 0.0;
  const CMatrix dfz = pg.jet.df.cast<Complex>() * frame.complex_frame;
  const int k = static_cast<int>(dfz.cols());
  CMatrix all(pg.ambient_dim(), 2 * k);
  all << dfz, *frame.normal_frame;
  const CMatrix gram = all.adjoint() * pg.g.cast<Complex>() * all;
  double diag = 1.0;
  for (int i = 0; i < gram.rows(); ++i) diag *= gram(i, i).real();
  return std::abs(gram.determinant()) / diag;
}

PfaffianSign pfaffian_sign(const PulledBackForm& form, int orientation, bool strict,
                           const AngleOptions& options) {
  if (form.form.rows() != 4)
    throw DimensionError("the Pfaffian sign is defined for n = 2 only");
  if (orientation != 1 && orientation != -1) throw Error("orientation must be +1 or -1");
  const Matrix& w = form.form;
  const double pf = w(0, 1) * w(2, 3) - w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2);
  const AngleSpectrum spec = angle_spectrum(form, options);
  const double c1 = spec.cosines[0], c2 = spec.cosines[1];

  PfaffianSign out;
  out.wedge_ratio = orientation * pf / std::sqrt(form.g_m.determinant());
  out.epsilon = out.wedge_ratio < 0.0 && std::abs(out.wedge_ratio) > options.rank_tol ? -1 : 1;
  out.s2 = out.epsilon * c2;
  out.residual = std::abs(out.wedge_ratio - out.epsilon * c1 * c2);
  const bool both_zero = c1 <= options.rank_tol;
  out.split_smooth = both_zero || c1 - c2 > options.cluster_tol;
  if (strict && !out.split_smooth)
    throw DegenerateSpectrumError("cos t1 = cos t2: the sign split is not smooth here");
  return out;
}

PfaffianSign pfaffian_sign(const Immersion& f, const Vector& p, int orientation, bool strict,
                           const AngleOptions& options) {
  return pfaffian_sign(pullback_form(f, p), orientation, strict, options);
}

}  // namespace kahler
