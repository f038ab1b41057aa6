#pragma once

// Target Kähler manifolds N, described in holomorphic chart coordinates
// (x1, y1, x2, y2, ...) with z_k = x_k + i y_k, so the complex structure is the
// constant matrix J e_{x_k} = e_{y_k}.
//
// Curvature sign convention (mandatory for every identity in this library):
//   R(U,V)W = -∇_U ∇_V W + ∇_V ∇_U W + ∇_[U,V] W,   R(U,V,W,Z) = g(R(U,V)W, Z).
// With it, the Gauss curvature of a surface is K = R(X,Y,X,Y) for a
// g-orthonormal pair X, Y, and Ricci(U,V) = -1/2 trace(Z -> R(U,JV)JZ).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/types.hpp"

namespace kahler {

/// Lowered Riemann tensor at one point, in the sign convention above.
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  explicit CurvatureTensor(Tensor4 components) : r_(std::move(components)) {}

  int dim() const { return r_.dim(); }
  double operator()(int a, int b, int c, int d) const { return r_(a, b, c, d); }
  const Tensor4& components() const { return r_; }

  /// C-multilinear extension.
  Complex evaluate(const CVector& u, const CVector& v, const CVector& w,
                   const CVector& z) const;
  double evaluate(const Vector& u, const Vector& v, const Vector& w,
                  const Vector& z) const;

  /// Sectional curvature of span{x, y}: R(x,y,x,y) / |x ∧ y|^2.
  double sectional(const Vector& x, const Vector& y, const Matrix& g) const;

  struct SymmetryResiduals {
    double antisymmetry_first = 0;   // R(U,V,.,.) + R(V,U,.,.)
    double antisymmetry_second = 0;  // R(.,.,W,Z) + R(.,.,Z,W)
    double pair_symmetry = 0;        // R(U,V,W,Z) - R(W,Z,U,V)
    double bianchi = 0;              // cyclic sum in (U,V,W)
    double kahler = 0;               // R(JU,JV,W,Z) - R(U,V,W,Z)
    double max() const;
  };
  SymmetryResiduals symmetry_residuals(const Matrix& complex_structure) const;

 private:
  Tensor4 r_;
};

/// One Kähler factor of a product ambient space. All oracles take the factor's
/// own coordinates.
class Factor {
 public:
  virtual ~Factor() = default;

  virtual std::string id() const = 0;
  virtual int complex_dim() const = 0;
  int real_dim() const { return 2 * complex_dim(); }
  double scale() const { return scale_; }

  virtual Box chart_box() const = 0;
  /// True when q is inside the chart and away from its boundary.
  virtual bool admissible(const Vector& q) const;

  virtual Matrix metric(const Vector& q) const = 0;
  /// (c, a, b) -> ∂_c g_ab.
  virtual Tensor3 metric_derivative(const Vector& q) const = 0;
  /// (a, b, c) -> Γ^a_bc.
  virtual Tensor3 christoffel(const Vector& q) const = 0;
  virtual Tensor4 curvature(const Vector& q) const = 0;
  /// Ricci = R g; empty when not Einstein.
  virtual std::optional<double> einstein_constant() const = 0;
  virtual bool flat() const { return false; }

  nlohmann::json descriptor() const;

 protected:
  explicit Factor(double scale);

 private:
  double scale_;
};

/// Euclidean C^m, metric scale * (dx^2 + dy^2).
class FlatFactor : public Factor {
 public:
  explicit FlatFactor(int complex_dim, double scale = 1.0, bool torus = false);
  std::string id() const override;
  int complex_dim() const override { return m_; }
  Box chart_box() const override;
  Matrix metric(const Vector& q) const override;
  Tensor3 metric_derivative(const Vector& q) const override;
  Tensor3 christoffel(const Vector& q) const override;
  Tensor4 curvature(const Vector& q) const override;
  std::optional<double> einstein_constant() const override { return 0.0; }
  bool flat() const override { return true; }

 private:
  int m_;
  bool torus_;
};

/// Poincaré disk, metric scale * 4 (dx^2 + dy^2) / (1 - r^2)^2, Gauss
/// curvature -1 / scale.
class DiskFactor : public Factor {
 public:
  explicit DiskFactor(double scale = 1.0);
  std::string id() const override { return "disk"; }
  int complex_dim() const override { return 1; }
  Box chart_box() const override;
  bool admissible(const Vector& q) const override;
  Matrix metric(const Vector& q) const override;
  Tensor3 metric_derivative(const Vector& q) const override;
  Tensor3 christoffel(const Vector& q) const override;
  Tensor4 curvature(const Vector& q) const override;
  std::optional<double> einstein_constant() const override { return -1.0 / scale(); }
};

/// Fubini–Study metric on CP^2 in the affine chart [1 : z1 : z2], holomorphic
/// sectional curvature 4 / scale; Ricci = (6 / scale) g.
class Cp2Factor : public Factor {
 public:
  explicit Cp2Factor(double scale = 1.0);
  std::string id() const override { return "cp2:fs"; }
  int complex_dim() const override { return 2; }
  Box chart_box() const override;
  Matrix metric(const Vector& q) const override;
  Tensor3 metric_derivative(const Vector& q) const override;
  Tensor3 christoffel(const Vector& q) const override;
  Tensor4 curvature(const Vector& q) const override;
  std::optional<double> einstein_constant() const override { return 6.0 / scale(); }
};

/// Product of Kähler factors, coordinates concatenated. Immutable.
class AmbientSpace {
 public:
  AmbientSpace(std::string id, std::vector<std::shared_ptr<const Factor>> factors);

  const std::string& id() const { return id_; }
  int real_dim() const { return real_dim_; }
  int complex_dim() const { return real_dim_ / 2; }
  const std::vector<std::shared_ptr<const Factor>>& factors() const { return factors_; }

  Box chart_domain() const;
  bool admissible(const Vector& q) const;
  /// Throws DomainError naming the offending point.
  void require_admissible(const Vector& q) const;

  Matrix metric(const Vector& q) const;
  Tensor3 metric_derivative(const Vector& q) const;
  Matrix complex_structure(const Vector& q) const;
  Matrix complex_structure() const;

  std::optional<double> einstein_constant() const { return einstein_; }
  bool is_flat() const;
  /// Same geometry, Einstein constant overridden. Used for synthetic fixtures
  /// (negative controls); the geometry no longer satisfies Ricci = R g.
  AmbientSpace with_declared_einstein_constant(double r) const;
  bool einstein_constant_is_declared() const { return declared_; }

  nlohmann::json descriptor() const;

  // Oracles on the whole space; see free functions below for the checked API.
  Tensor3 christoffel_unchecked(const Vector& q) const;
  Tensor4 curvature_unchecked(const Vector& q) const;

 private:
  std::string id_;
  std::vector<std::shared_ptr<const Factor>> factors_;
  std::vector<int> offsets_;
  int real_dim_ = 0;
  std::optional<double> einstein_;
  bool declared_ = false;
};

/// Γ^a_bc at q, analytic. Throws DomainError outside the chart.
Tensor3 christoffel_at(const AmbientSpace& space, const Vector& q);
CurvatureTensor curvature_at(const AmbientSpace& space, const Vector& q);
/// Ricci(U,V) = -1/2 Σ g^{ab} R(U, JV, J e_a, e_b).
Matrix ricci_at(const AmbientSpace& space, const Vector& q);
/// Same contraction applied to a given tensor.
Matrix ricci_contraction(const CurvatureTensor& r, const Matrix& g, const Matrix& j);
/// Ricci(Y,Z) = trace(X -> R_std(X,Y)Z) with R_std = -R; independent of J.
Matrix ricci_trace(const CurvatureTensor& r, const Matrix& g);
/// ||Ricci - R g|| / ||g|| (max-abs norms); NaN when not Einstein.
double einstein_residual(const AmbientSpace& space, const Vector& q);

// Independent finite-difference routes, used as oracles.
Tensor3 christoffel_from_metric_fd(const AmbientSpace& space, const Vector& q,
                                   double h = 1e-3);
CurvatureTensor curvature_from_christoffel_fd(const AmbientSpace& space,
                                              const Vector& q, double h = 1e-3);
/// Components of dω (ω(U,V) = g(JU,V)) by fourth-order central differences.
Tensor3 kahler_form_exterior_derivative_fd(const AmbientSpace& space,
                                           const Vector& q, double h = 1e-3);

/// Lowered curvature from a connection and its coordinate derivatives
/// (dgamma[k] = ∂_k Γ), in the sign convention of this header.
CurvatureTensor curvature_from_connection(const Matrix& g, const Tensor3& gamma,
                                          const std::vector<Tensor3>& dgamma);

/// Catalog spaces: flat:C2, flat:C4, torus:T4, cp2:fs, diskxdisk.
AmbientSpace make_ambient(const std::string& id);
std::vector<std::string> ambient_ids();
/// Accepts a catalog id string or {"factors": [{"id": ..., "scale": ...}],
/// "declared_einstein_constant": R}.
AmbientSpace ambient_from_json(const nlohmann::json& j);
AmbientSpace product(const AmbientSpace& a, const AmbientSpace& b);

}  // namespace kahler
