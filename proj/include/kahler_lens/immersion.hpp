#pragma once

// Immersions F: M^{2n} -> N with dim_C N = 2n, given in chart coordinates.
// Jets are exact where a closed form exists and fall back to central
// differences otherwise; Jet::analytic records which.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/ambient.hpp"
#include "kahler_lens/types.hpp"

namespace kahler {

struct Jet {
  Vector value;   // F(p), ambient coordinates
  Matrix df;      // N x m, column a = ∂_a F
  Tensor3 d2f;    // (l, a, b) = ∂_a ∂_b F^l
  bool analytic = false;
};

class Immersion {
 public:
  virtual ~Immersion() = default;

  virtual std::string id() const = 0;
  virtual int domain_dim() const = 0;
  virtual Box domain() const = 0;
  virtual Vector map(const Vector& p) const = 0;
  virtual bool has_analytic_jet() const { return false; }
  /// Exact jet when available, finite differences otherwise.
  virtual Jet jet(const Vector& p) const { return fd_jet(p); }
  virtual nlohmann::json descriptor() const;

  /// Central differences of order 4 on map(): steps eps^(1/5) for dF and
  /// eps^(1/6) for d2F.
  Jet fd_jet(const Vector& p) const;

  const AmbientSpace& ambient() const { return *ambient_; }
  std::shared_ptr<const AmbientSpace> ambient_ptr() const { return ambient_; }

  bool admissible(const Vector& p, double margin = 0.0) const;
  /// Throws DomainError when p is outside the domain or F(p) outside the chart.
  void require_admissible(const Vector& p) const;

 protected:
  explicit Immersion(std::shared_ptr<const AmbientSpace> ambient);
  void check_dimensions() const;

 private:
  std::shared_ptr<const AmbientSpace> ambient_;
};

using ImmersionPtr = std::shared_ptr<const Immersion>;

// Real polynomial maps ---------------------------------------------------------

struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  const std::vector<Monomial>& terms() const { return terms_; }

  /// Terms as [{"coef": "p/q" | number, "powers": [...]}, ...].
  static Polynomial from_json(const nlohmann::json& j, int vars);
  nlohmann::json to_json() const;

 private:
  std::vector<Monomial> terms_;
};

/// Parses "p/q", "p" or a JSON number.
double parse_rational(const nlohmann::json& j);

class PolynomialImmersion : public Immersion {
 public:
  PolynomialImmersion(std::shared_ptr<const AmbientSpace> ambient, std::vector<Polynomial> components,
                      Box domain, std::string id = "polynomial");

  std::string id() const override { return id_; }
  int domain_dim() const override { return domain_.dim(); }
  Box domain() const override { return domain_; }
  Vector map(const Vector& p) const override;
  bool has_analytic_jet() const override { return true; }
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;

  /// {"ambient": ..., "components": [[terms]...], "domain": {"lower", "upper"}}
  static std::shared_ptr<PolynomialImmersion> from_json(const nlohmann::json& j);

 private:
  std::vector<Polynomial> components_;
  Box domain_;
  std::string id_;
};

// Holomorphic data --------------------------------------------------------------

struct ComplexMonomial {
  Complex coef;
  std::vector<int> powers;
};

/// Polynomial in complex variables w_1..w_k.
class ComplexPolynomial {
 public:
  ComplexPolynomial() = default;
  ComplexPolynomial(int vars, std::vector<ComplexMonomial> terms);
  /// One variable, coefficients of 1, w, w^2, ...
  static ComplexPolynomial univariate(const std::vector<Complex>& coefficients);

  int vars() const { return vars_; }
  Complex value(const CVector& w) const;
  CVector gradient(const CVector& w) const;
  CMatrix hessian(const CVector& w) const;
  const std::vector<ComplexMonomial>& terms() const { return terms_; }

  /// [{"re": .., "im": .., "powers": [...]}, ...] or, for one variable, a
  /// coefficient list [[re, im], ...] / [re, ...].
  static ComplexPolynomial from_json(const nlohmann::json& j, int vars);
  nlohmann::json to_json() const;

 private:
  int vars_ = 1;
  std::vector<ComplexMonomial> terms_;
};

/// F(p) = L realify(w, h_1(w), ..., h_n(w)) with w = (x_1 + i y_1, ...).
/// With L = I this is a complex submanifold; with L mapping the standard
/// structure to another orthogonal complex structure the image is complex
/// for that structure instead.
class HolomorphicGraphImmersion : public Immersion {
 public:
  HolomorphicGraphImmersion(std::shared_ptr<const AmbientSpace> ambient,
                            std::vector<ComplexPolynomial> graph, Matrix linear, Box domain,
                            std::string id);

  std::string id() const override { return id_; }
  int domain_dim() const override { return 2 * static_cast<int>(graph_.size()); }
  Box domain() const override { return domain_; }
  Vector map(const Vector& p) const override;
  bool has_analytic_jet() const override { return true; }
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;
  const Matrix& linear() const { return linear_; }

 private:
  std::vector<ComplexPolynomial> graph_;
  Matrix linear_;
  Box domain_;
  std::string id_;
};

/// Minimal surface in R^4 = C^2 from the null curve
///   φ = ((1 + f1 f2) g0 / 2, i (1 - f1 f2) g0 / 2, (f1 - f2) g0 / 2, i (f1 + f2) g0 / 2),
/// F(z) = Re ∫_0^z φ, integrated along 0 -> x -> x + iy by adaptive
/// Gauss–Kronrod quadrature.
class WeierstrassImmersion : public Immersion {
 public:
  WeierstrassImmersion(ComplexPolynomial f1, ComplexPolynomial f2, ComplexPolynomial g0, Box domain,
                       std::string id = "weierstrass");

  std::string id() const override { return id_; }
  int domain_dim() const override { return 2; }
  Box domain() const override { return domain_; }
  Vector map(const Vector& p) const override;
  bool has_analytic_jet() const override { return true; }
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;

  CVector phi(Complex z) const;
  CVector phi_prime(Complex z) const;
  /// ∫_0^z φ by quadrature.
  CVector integral(Complex z) const;

 private:
  ComplexPolynomial f1_, f2_, g0_;
  Box domain_;
  std::string id_;
};

/// F1 x F2 into the product ambient space.
class ProductImmersion : public Immersion {
 public:
  ProductImmersion(ImmersionPtr first, ImmersionPtr second);

  std::string id() const override;
  int domain_dim() const override;
  Box domain() const override;
  Vector map(const Vector& p) const override;
  bool has_analytic_jet() const override;
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;

 private:
  ImmersionPtr first_, second_;
};

/// Closed-form immersion given by callables (jet optional).
class FunctionImmersion : public Immersion {
 public:
  using MapFn = std::function<Vector(const Vector&)>;
  using JetFn = std::function<Jet(const Vector&)>;

  FunctionImmersion(std::shared_ptr<const AmbientSpace> ambient, int domain_dim, Box domain,
                    MapFn map, JetFn jet, std::string id, nlohmann::json params = {});

  std::string id() const override { return id_; }
  int domain_dim() const override { return dim_; }
  Box domain() const override { return domain_; }
  Vector map(const Vector& p) const override { return map_(p); }
  bool has_analytic_jet() const override { return static_cast<bool>(jet_); }
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;

 private:
  int dim_;
  Box domain_;
  MapFn map_;
  JetFn jet_;
  std::string id_;
  nlohmann::json params_;
};

/// Same map, different jet source and/or ambient description. Used to force
/// finite-difference jets and to attach a declared Einstein constant.
class ImmersionView : public Immersion {
 public:
  ImmersionView(ImmersionPtr inner, std::shared_ptr<const AmbientSpace> ambient, bool force_fd);

  std::string id() const override { return inner_->id(); }
  int domain_dim() const override { return inner_->domain_dim(); }
  Box domain() const override { return inner_->domain(); }
  Vector map(const Vector& p) const override { return inner_->map(p); }
  bool has_analytic_jet() const override { return !force_fd_ && inner_->has_analytic_jet(); }
  Jet jet(const Vector& p) const override;
  nlohmann::json descriptor() const override;

 private:
  ImmersionPtr inner_;
  bool force_fd_;
};

ImmersionPtr with_fd_jets(ImmersionPtr f);
ImmersionPtr with_declared_einstein_constant(ImmersionPtr f, double r);

// Pointwise geometry -------------------------------------------------------------

/// Everything first- and second-order about F at one point.
struct PointGeometry {
  Vector p;
  Jet jet;
  Matrix g;            // ambient metric at F(p)
  Matrix j;            // ambient complex structure
  Tensor3 gamma_n;     // ambient Christoffels (a, b, c) = Γ^a_bc
  Matrix g_m;          // induced metric
  Matrix g_m_inv;
  Tensor3 gamma_m;     // induced Christoffels
  Matrix projection;   // normal projection P, N x N
  Tensor3 sff;         // (l, a, b) = ∇dF(∂_a, ∂_b)^l
  double normality_residual = 0.0;

  int m() const { return static_cast<int>(g_m.rows()); }
  int ambient_dim() const { return static_cast<int>(g.rows()); }
  /// ∇dF(X, Y) for complex chart vectors X, Y.
  CVector sff_apply(const CVector& x, const CVector& y) const;
  /// trace_{g_M} ∇dF.
  Vector mean_curvature() const;
};

/// Raises DegenerateImmersionError when dF loses rank (ratio of extreme
/// singular values of dF in orthonormal gauges below rank_tol).
PointGeometry point_geometry(const Immersion& f, const Vector& p, double rank_tol = 1e-8);

Matrix induced_metric(const Immersion& f, const Vector& p);

/// Normal-valued symmetric form, values indexed (tangent, tangent, ambient).
struct SecondFundamentalForm {
  Tensor3 values;  // (a, b, l)
  double normality_residual = 0.0;
  double symmetry_residual = 0.0;
};
SecondFundamentalForm second_fundamental_form(const Immersion& f, const Vector& p);

/// g-norm of trace_{g_M} ∇dF (sum over a g_M-orthonormal basis).
double minimality_residual(const Immersion& f, const Vector& p);

Vector normal_projection(const Immersion& f, const Vector& p, const Vector& v);

/// Induced Christoffels (a, b, c) = Γ^a_bc of g_M from the analytic 2-jet.
Tensor3 induced_christoffel(const Immersion& f, const Vector& p);

}  // namespace kahler
