#include "kahler_lens/ambient.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "kahler_lens/finite_difference.hpp"

namespace kahler {

namespace {

constexpr double kBoundaryMargin = 1e-3;

std::string format_point(const Vector& q) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < q.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", q[i]);
    os << (i ? ", " : "") << buf;
  }
  os << ")";
  return os.str();
}

Matrix standard_complex_structure(int real_dim) {
  Matrix j = Matrix::Zero(real_dim, real_dim);
  for (int k = 0; k < real_dim / 2; ++k) {
    j(2 * k + 1, 2 * k) = 1.0;
    j(2 * k, 2 * k + 1) = -1.0;
  }
  return j;
}

// Complex vector of the real basis vector e_a in C^m.
CVector complex_basis(int m, int a) {
  CVector u = CVector::Zero(m);
  u[a / 2] = (a % 2 == 0) ? Complex(1.0, 0.0) : kI;
  return u;
}

Vector realify(const CVector& w) {
  Vector r(2 * w.size());
  for (int k = 0; k < w.size(); ++k) {
    r[2 * k] = w[k].real();
    r[2 * k + 1] = w[k].imag();
  }
  return r;
}

CVector complexify(const Vector& q) {
  CVector z(q.size() / 2);
  for (int k = 0; k < z.size(); ++k) z[k] = Complex(q[2 * k], q[2 * k + 1]);
  return z;
}

// Rp = -K (g(Y,Z) g(X,W) - g(X,Z) g(Y,W)) for constant sectional curvature K.
Tensor4 constant_curvature(const Matrix& g, double k) {
  const int n = static_cast<int>(g.rows());
  Tensor4 r(n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      for (int z = 0; z < n; ++z)
        for (int w = 0; w < n; ++w)
          r(x, y, z, w) = -k * (g(y, z) * g(x, w) - g(x, z) * g(y, w));
  return r;
}

bool same_constant(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

// CurvatureTensor ------------------------------------------------------------

Complex CurvatureTensor::evaluate(const CVector& u, const CVector& v,
                                  const CVector& w, const CVector& z) const {
  const int n = dim();
  Complex s = 0.0;
  for (int a = 0; a < n; ++a) {
    if (u[a] == 0.0) continue;
    for (int b = 0; b < n; ++b) {
      if (v[b] == 0.0) continue;
      const Complex uv = u[a] * v[b];
      for (int c = 0; c < n; ++c) {
        if (w[c] == 0.0) continue;
        Complex inner = 0.0;
        for (int d = 0; d < n; ++d) inner += r_(a, b, c, d) * z[d];
        s += uv * w[c] * inner;
      }
    }
  }
  return s;
}

double CurvatureTensor::evaluate(const Vector& u, const Vector& v, const Vector& w,
                                 const Vector& z) const {
  return evaluate(CVector(u.cast<Complex>()), CVector(v.cast<Complex>()),
                  CVector(w.cast<Complex>()), CVector(z.cast<Complex>()))
      .real();
}

double CurvatureTensor::sectional(const Vector& x, const Vector& y,
                                  const Matrix& g) const {
  const double area2 = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
  return evaluate(x, y, x, y) / area2;
}

double CurvatureTensor::SymmetryResiduals::max() const {
  return std::max({antisymmetry_first, antisymmetry_second, pair_symmetry, bianchi,
                   kahler});
}

CurvatureTensor::SymmetryResiduals CurvatureTensor::symmetry_residuals(
    const Matrix& j) const {
  const int n = dim();
  SymmetryResiduals res;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double r = r_(a, b, c, d);
          res.antisymmetry_first = std::max(res.antisymmetry_first, std::abs(r + r_(b, a, c, d)));
          res.antisymmetry_second = std::max(res.antisymmetry_second, std::abs(r + r_(a, b, d, c)));
          res.pair_symmetry = std::max(res.pair_symmetry, std::abs(r - r_(c, d, a, b)));
          res.bianchi = std::max(res.bianchi, std::abs(r + r_(b, c, a, d) + r_(c, a, b, d)));
          double rj = 0.0;
          for (int a2 = 0; a2 < n; ++a2) {
            if (j(a2, a) == 0.0) continue;
            for (int b2 = 0; b2 < n; ++b2) {
              if (j(b2, b) == 0.0) continue;
              rj += j(a2, a) * j(b2, b) * r_(a2, b2, c, d);
            }
          }
          res.kahler = std::max(res.kahler, std::abs(rj - r));
        }
  return res;
}

// Factors --------------------------------------------------------------------

Factor::Factor(double scale) : scale_(scale) {
  if (!(scale > 0.0)) throw DomainError("factor scale must be positive");
}

bool Factor::admissible(const Vector& q) const {
  return chart_box().contains(q, kBoundaryMargin);
}

nlohmann::json Factor::descriptor() const {
  nlohmann::json j;
  j["id"] = id();
  j["scale"] = scale();
  j["complex_dim"] = complex_dim();
  if (auto r = einstein_constant()) j["einstein_constant"] = *r;
  return j;
}

FlatFactor::FlatFactor(int complex_dim, double scale, bool torus)
    : Factor(scale), m_(complex_dim), torus_(torus) {
  if (complex_dim < 1) throw DimensionError("flat factor needs complex_dim >= 1");
}

std::string FlatFactor::id() const {
  return (torus_ ? "torus:T" : "flat:C") + std::to_string(torus_ ? 2 * m_ : m_);
}

Box FlatFactor::chart_box() const {
  const double half = torus_ ? M_PI : 1e3;
  return {Vector::Constant(real_dim(), -half), Vector::Constant(real_dim(), half)};
}

Matrix FlatFactor::metric(const Vector&) const {
  return scale() * Matrix::Identity(real_dim(), real_dim());
}

Tensor3 FlatFactor::metric_derivative(const Vector&) const {
  return Tensor3(real_dim(), real_dim(), real_dim());
}

Tensor3 FlatFactor::christoffel(const Vector&) const {
  return Tensor3(real_dim(), real_dim(), real_dim());
}

Tensor4 FlatFactor::curvature(const Vector&) const { return Tensor4(real_dim()); }

DiskFactor::DiskFactor(double scale) : Factor(scale) {}

Box DiskFactor::chart_box() const {
  return {Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
}

bool DiskFactor::admissible(const Vector& q) const {
  return q.size() == 2 && std::isfinite(q.norm()) && 1.0 - q.norm() >= kBoundaryMargin;
}

Matrix DiskFactor::metric(const Vector& q) const {
  const double d = 1.0 - q.squaredNorm();
  return scale() * 4.0 / (d * d) * Matrix::Identity(2, 2);
}

Tensor3 DiskFactor::metric_derivative(const Vector& q) const {
  const double d = 1.0 - q.squaredNorm();
  Tensor3 t(2, 2, 2);
  for (int c = 0; c < 2; ++c) {
    const double v = scale() * 16.0 * q[c] / (d * d * d);
    t(c, 0, 0) = v;
    t(c, 1, 1) = v;
  }
  return t;
}

Tensor3 DiskFactor::christoffel(const Vector& q) const {
  const double d = 1.0 - q.squaredNorm();
  const double phi[2] = {2.0 * q[0] / d, 2.0 * q[1] / d};
  Tensor3 t(2, 2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        t(a, b, c) = (a == b ? phi[c] : 0.0) + (a == c ? phi[b] : 0.0) -
                     (b == c ? phi[a] : 0.0);
  return t;
}

Tensor4 DiskFactor::curvature(const Vector& q) const {
  return constant_curvature(metric(q), -1.0 / scale());
}

Cp2Factor::Cp2Factor(double scale) : Factor(scale) {}

Box Cp2Factor::chart_box() const {
  return {Vector::Constant(4, -1e3), Vector::Constant(4, 1e3)};
}

namespace {

// h_ij = δ_ij / S - conj(z_i) z_j / S^2, so g(u, v) = s Re(u^T h conj(v)).
CMatrix fs_hermitian(const CVector& z) {
  const double s = 1.0 + z.squaredNorm();
  return CMatrix::Identity(2, 2) / s - z.conjugate() * z.transpose() / (s * s);
}

CMatrix fs_hermitian_derivative(const CVector& z, const CVector& d) {
  const double s = 1.0 + z.squaredNorm();
  const double ds = 2.0 * z.dot(d).real();  // dot conjugates z
  return -CMatrix::Identity(2, 2) * (ds / (s * s)) -
         (d.conjugate() * z.transpose() + z.conjugate() * d.transpose()) / (s * s) +
         z.conjugate() * z.transpose() * (2.0 * ds / (s * s * s));
}

}  // namespace

Matrix Cp2Factor::metric(const Vector& q) const {
  const CMatrix h = fs_hermitian(complexify(q));
  Matrix g(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      g(a, b) = scale() *
                (complex_basis(2, a).transpose() * h * complex_basis(2, b).conjugate())(0, 0)
                    .real();
  return g;
}

Tensor3 Cp2Factor::metric_derivative(const Vector& q) const {
  const CVector z = complexify(q);
  Tensor3 t(4, 4, 4);
  for (int c = 0; c < 4; ++c) {
    const CMatrix dh = fs_hermitian_derivative(z, complex_basis(2, c));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        t(c, a, b) =
            scale() *
            (complex_basis(2, a).transpose() * dh * complex_basis(2, b).conjugate())(0, 0)
                .real();
  }
  return t;
}

Tensor3 Cp2Factor::christoffel(const Vector& q) const {
  const CVector z = complexify(q);
  const double s = 1.0 + z.squaredNorm();
  Tensor3 t(4, 4, 4);
  for (int b = 0; b < 4; ++b)
    for (int c = 0; c < 4; ++c) {
      const CVector u = complex_basis(2, b);
      const CVector v = complex_basis(2, c);
      const CVector gam = -(z.dot(u) * v + z.dot(v) * u) / s;
      const Vector r = realify(gam);
      for (int a = 0; a < 4; ++a) t(a, b, c) = r[a];
    }
  return t;
}

Tensor4 Cp2Factor::curvature(const Vector& q) const {
  const Matrix g = metric(q);
  const Matrix j = standard_complex_structure(4);
  const Matrix gj = g * j;  // gj(a, b) = g(e_a, J e_b)
  const double c = 4.0 / scale();
  // g(JX, Y) with X = e_x, Y = e_y is gj(y, x).
  auto gJ = [&](int x, int y) { return gj(y, x); };
  Tensor4 r(4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z)
        for (int w = 0; w < 4; ++w) {
          const double standard =
              g(y, z) * g(x, w) - g(x, z) * g(y, w) + gJ(y, z) * gJ(x, w) -
              gJ(x, z) * gJ(y, w) + 2.0 * gj(x, y) * gJ(z, w);
          r(x, y, z, w) = -0.25 * c * standard;
        }
  return r;
}

// AmbientSpace -----------------------------------------------------------------

AmbientSpace::AmbientSpace(std::string id, std::vector<std::shared_ptr<const Factor>> factors)
    : id_(std::move(id)), factors_(std::move(factors)) {
  if (factors_.empty()) throw DimensionError("ambient space needs at least one factor");
  for (const auto& f : factors_) {
    offsets_.push_back(real_dim_);
    real_dim_ += f->real_dim();
  }
  einstein_ = factors_.front()->einstein_constant();
  for (const auto& f : factors_) {
    auto r = f->einstein_constant();
    if (!r || !einstein_ || !same_constant(*r, *einstein_)) {
      einstein_.reset();
      break;
    }
  }
}

Box AmbientSpace::chart_domain() const {
  Box box{Vector(real_dim_), Vector(real_dim_)};
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Box b = factors_[i]->chart_box();
    box.lower.segment(offsets_[i], b.dim()) = b.lower;
    box.upper.segment(offsets_[i], b.dim()) = b.upper;
  }
  return box;
}

bool AmbientSpace::admissible(const Vector& q) const {
  if (q.size() != real_dim_) return false;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (!factors_[i]->admissible(q.segment(offsets_[i], factors_[i]->real_dim())))
      return false;
  }
  return true;
}

void AmbientSpace::require_admissible(const Vector& q) const {
  if (q.size() != real_dim_)
    throw DimensionError("point of dimension " + std::to_string(q.size()) + " in " + id_ +
                         " of real dimension " + std::to_string(real_dim_));
  if (!admissible(q))
    throw DomainError("point " + format_point(q) + " outside the chart domain of " + id_);
}

Matrix AmbientSpace::metric(const Vector& q) const {
  Matrix g = Matrix::Zero(real_dim_, real_dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int d = factors_[i]->real_dim();
    g.block(offsets_[i], offsets_[i], d, d) = factors_[i]->metric(q.segment(offsets_[i], d));
  }
  return g;
}

Tensor3 AmbientSpace::metric_derivative(const Vector& q) const {
  Tensor3 t(real_dim_, real_dim_, real_dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int d = factors_[i]->real_dim();
    const int o = offsets_[i];
    const Tensor3 f = factors_[i]->metric_derivative(q.segment(o, d));
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) t(o + c, o + a, o + b) = f(c, a, b);
  }
  return t;
}

Matrix AmbientSpace::complex_structure(const Vector&) const { return complex_structure(); }

Matrix AmbientSpace::complex_structure() const {
  return standard_complex_structure(real_dim_);
}

bool AmbientSpace::is_flat() const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [](const auto& f) { return f->flat(); });
}

AmbientSpace AmbientSpace::with_declared_einstein_constant(double r) const {
  AmbientSpace copy = *this;
  copy.einstein_ = r;
  copy.declared_ = true;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s[R=%.17g]", id_.c_str(), r);
  copy.id_ = buf;
  return copy;
}

nlohmann::json AmbientSpace::descriptor() const {
  nlohmann::json j;
  j["id"] = id_;
  j["real_dim"] = real_dim_;
  j["factors"] = nlohmann::json::array();
  for (const auto& f : factors_) j["factors"].push_back(f->descriptor());
  j["einstein_constant"] = einstein_ ? nlohmann::json(*einstein_) : nlohmann::json(nullptr);
  if (declared_) j["declared_einstein_constant"] = true;
  return j;
}

Tensor3 AmbientSpace::christoffel_unchecked(const Vector& q) const {
  Tensor3 t(real_dim_, real_dim_, real_dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int d = factors_[i]->real_dim();
    const int o = offsets_[i];
    const Tensor3 f = factors_[i]->christoffel(q.segment(o, d));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) t(o + a, o + b, o + c) = f(a, b, c);
  }
  return t;
}

Tensor4 AmbientSpace::curvature_unchecked(const Vector& q) const {
  Tensor4 r(real_dim_);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int d = factors_[i]->real_dim();
    const int o = offsets_[i];
    const Tensor4 f = factors_[i]->curvature(q.segment(o, d));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          for (int e = 0; e < d; ++e) r(o + a, o + b, o + c, o + e) = f(a, b, c, e);
  }
  return r;
}

// Free functions ---------------------------------------------------------------

Tensor3 christoffel_at(const AmbientSpace& space, const Vector& q) {
  space.require_admissible(q);
  return space.christoffel_unchecked(q);
}

CurvatureTensor curvature_at(const AmbientSpace& space, const Vector& q) {
  space.require_admissible(q);
  return CurvatureTensor(space.curvature_unchecked(q));
}

Matrix ricci_contraction(const CurvatureTensor& r, const Matrix& g, const Matrix& j) {
  const int n = r.dim();
  const Matrix gi = g.inverse();
  Matrix ric = Matrix::Zero(n, n);
  // Ricci(u, v) = -1/2 Σ g^{ab} R(e_u, J e_v, J e_a, e_b)
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      double s = 0.0;
      for (int v2 = 0; v2 < n; ++v2) {
        if (j(v2, v) == 0.0) continue;
        for (int a = 0; a < n; ++a)
          for (int a2 = 0; a2 < n; ++a2) {
            if (j(a2, a) == 0.0) continue;
            for (int b = 0; b < n; ++b)
              s += gi(a, b) * j(v2, v) * j(a2, a) * r(u, v2, a2, b);
          }
      }
      ric(u, v) = -0.5 * s;
    }
  return ric;
}

Matrix ricci_trace(const CurvatureTensor& r, const Matrix& g) {
  const int n = r.dim();
  const Matrix gi = g.inverse();
  Matrix ric = Matrix::Zero(n, n);
  for (int y = 0; y < n; ++y)
    for (int z = 0; z < n; ++z) {
      double s = 0.0;
      for (int x = 0; x < n; ++x)
        for (int w = 0; w < n; ++w) s -= gi(x, w) * r(x, y, z, w);
      ric(y, z) = s;
    }
  return ric;
}

Matrix ricci_at(const AmbientSpace& space, const Vector& q) {
  const CurvatureTensor r = curvature_at(space, q);
  return ricci_contraction(r, space.metric(q), space.complex_structure(q));
}

double einstein_residual(const AmbientSpace& space, const Vector& q) {
  const auto r = space.einstein_constant();
  if (!r) return std::nan("");
  const Matrix g = space.metric(q);
  return (ricci_at(space, q) - *r * g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff();
}

namespace {

Tensor3 christoffel_from_derivative(const Matrix& g, const Tensor3& dg) {
  const int n = static_cast<int>(g.rows());
  const Matrix gi = g.inverse();
  Tensor3 t(n, n, n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int m = 0; m < n; ++m)
          s += gi(l, m) * (dg(i, m, j) + dg(j, m, i) - dg(m, i, j));
        t(l, i, j) = 0.5 * s;
      }
  return t;
}

}  // namespace

Tensor3 christoffel_from_metric_fd(const AmbientSpace& space, const Vector& q, double h) {
  space.require_admissible(q);
  const int n = space.real_dim();
  Tensor3 dg(n, n, n);
  for (int c = 0; c < n; ++c) {
    const Matrix d = fd::partial([&](const Vector& x) { return space.metric(x); }, q, c, h);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dg(c, a, b) = d(a, b);
  }
  return christoffel_from_derivative(space.metric(q), dg);
}

CurvatureTensor curvature_from_connection(const Matrix& g, const Tensor3& gam,
                                          const std::vector<Tensor3>& dgam) {
  const int n = static_cast<int>(g.rows());
  // Standard R^l_{kij} = ∂_i Γ^l_{jk} - ∂_j Γ^l_{ik} + Γ^l_{im} Γ^m_{jk} - Γ^l_{jm} Γ^m_{ik};
  // lowered with the opposite sign: R(i, j, k, z) = -g_{lz} R^l_{kij}.
  Tensor4 out(n);
  std::vector<double> rs(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double v = dgam[i](l, j, k) - dgam[j](l, i, k);
          for (int m = 0; m < n; ++m) v += gam(l, i, m) * gam(m, j, k) - gam(l, j, m) * gam(m, i, k);
          rs[l] = v;
        }
        for (int z = 0; z < n; ++z) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += g(l, z) * rs[l];
          out(i, j, k, z) = -s;
        }
      }
  return CurvatureTensor(std::move(out));
}

CurvatureTensor curvature_from_christoffel_fd(const AmbientSpace& space, const Vector& q,
                                              double h) {
  space.require_admissible(q);
  const int n = space.real_dim();
  std::vector<Tensor3> dgam;
  for (int k = 0; k < n; ++k)
    dgam.push_back(fd::partial(
        [&](const Vector& x) { return space.christoffel_unchecked(x); }, q, k, h));
  return curvature_from_connection(space.metric(q), space.christoffel_unchecked(q), dgam);
}

Tensor3 kahler_form_exterior_derivative_fd(const AmbientSpace& space, const Vector& q,
                                           double h) {
  space.require_admissible(q);
  const int n = space.real_dim();
  const Matrix j = space.complex_structure();
  auto omega = [&](const Vector& x) -> Matrix { return j.transpose() * space.metric(x); };
  std::vector<Matrix> d;
  for (int a = 0; a < n; ++a) d.push_back(fd::partial(omega, q, a, h));
  Tensor3 t(n, n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) t(a, b, c) = d[a](b, c) + d[b](c, a) + d[c](a, b);
  return t;
}

// Construction -----------------------------------------------------------------

std::vector<std::string> ambient_ids() {
  return {"flat:C2", "flat:C4", "torus:T4", "cp2:fs", "diskxdisk"};
}

AmbientSpace make_ambient(const std::string& id) {
  using F = std::shared_ptr<const Factor>;
  if (id == "flat:C2") return AmbientSpace(id, {F(new FlatFactor(2))});
  if (id == "flat:C4") return AmbientSpace(id, {F(new FlatFactor(4))});
  if (id == "torus:T4") return AmbientSpace(id, {F(new FlatFactor(2, 1.0, true))});
  if (id == "cp2:fs") return AmbientSpace(id, {F(new Cp2Factor())});
  if (id == "diskxdisk") return AmbientSpace(id, {F(new DiskFactor()), F(new DiskFactor())});
  throw UnknownIdError("unknown ambient space '" + id + "'");
}

namespace {

std::shared_ptr<const Factor> factor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id"))
    throw Error("ambient factor must be an object with an \"id\"");
  const std::string id = j.at("id").get<std::string>();
  const double scale = j.value("scale", 1.0);
  const int m = j.value("complex_dim", 1);
  if (id == "disk") return std::make_shared<DiskFactor>(scale);
  if (id == "cp2:fs" || id == "cp2") return std::make_shared<Cp2Factor>(scale);
  if (id == "flat") return std::make_shared<FlatFactor>(m, scale);
  if (id == "torus") return std::make_shared<FlatFactor>(m, scale, true);
  if (id.rfind("flat:C", 0) == 0)
    return std::make_shared<FlatFactor>(std::stoi(id.substr(6)), scale);
  if (id.rfind("torus:T", 0) == 0) {
    const int real = std::stoi(id.substr(7));
    if (real % 2) throw DimensionError("torus needs even real dimension");
    return std::make_shared<FlatFactor>(real / 2, scale, true);
  }
  throw UnknownIdError("unknown ambient factor '" + id + "'");
}

}  // namespace

AmbientSpace ambient_from_json(const nlohmann::json& j) {
  if (j.is_string()) return make_ambient(j.get<std::string>());
  if (!j.is_object()) throw Error("ambient descriptor must be a string or an object");
  if (j.contains("id") && !j.contains("factors")) {
    AmbientSpace s = make_ambient(j.at("id").get<std::string>());
    if (j.contains("declared_einstein_constant"))
      return s.with_declared_einstein_constant(j.at("declared_einstein_constant").get<double>());
    return s;
  }
  std::vector<std::shared_ptr<const Factor>> factors;
  std::string id;
  for (const auto& f : j.at("factors")) {
    factors.push_back(factor_from_json(f));
    if (!id.empty()) id += "x";
    id += factors.back()->id();
  }
  AmbientSpace s(j.value("id", id), std::move(factors));
  if (j.contains("declared_einstein_constant"))
    return s.with_declared_einstein_constant(j.at("declared_einstein_constant").get<double>());
  return s;
}

AmbientSpace product(const AmbientSpace& a, const AmbientSpace& b) {
  auto factors = a.factors();
  factors.insert(factors.end(), b.factors().begin(), b.factors().end());
  return AmbientSpace(a.id() + "x" + b.id(), std::move(factors));
}

}  // namespace kahler
