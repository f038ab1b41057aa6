#pragma once

// Finite-difference calculus on M with the induced metric.

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/angles.hpp"
#include "kahler_lens/immersion.hpp"

namespace kahler {

struct FDScheme {
  double h = 1e-3;
  int order = 4;
  bool richardson = false;

  /// Throws Error unless h > 0 and order is 2 or 4.
  void validate() const;
  /// Half-width of a single stencil in chart units.
  double reach() const;
  nlohmann::json to_json() const;

  static FDScheme first_derivative() { return {1e-3, 4, false}; }
  static FDScheme laplacian() { return {1e-2, 4, false}; }
};

using ScalarField = std::function<double(const Vector&)>;

/// Wraps f so every evaluation first checks admissibility of the point.
ScalarField guarded(const Immersion& f, ScalarField field);

/// Central-difference gradient (covector in chart coordinates).
Vector fd_differential(const ScalarField& field, const Immersion& f, const Vector& p,
                       const FDScheme& scheme = FDScheme::first_derivative());

/// Δ = (1/√g) ∂_i(√g g^{ij} ∂_j ·), nested central differences. Negative at
/// strict interior maxima. With scheme.richardson, combines h and h/2.
double laplace_beltrami(const ScalarField& field, const Immersion& f, const Vector& p,
                        const FDScheme& scheme = FDScheme::laplacian());

/// Spectra sampled on the stencil around p.
struct StratumCheck {
  bool interior = true;
  int rank = 0;
  double min_nonzero_cosine = 1.0;
  double max_cosine = 0.0;
  std::string reason;  // empty when interior
};

/// Requires constant rank and continuous J_ω on the sampled stencil, nonzero
/// cosines above nonzero_margin and no cosine within complex_margin of 1.
StratumCheck check_stratum(const Immersion& f, const Vector& p, double radius,
                           const AngleOptions& options = {}, double nonzero_margin = 1e-4,
                           double complex_margin = 1e-4);

/// Adapted frame at p0, continued to nearby points by projecting the base
/// vectors onto the matching g̃ eigenspaces and re-orthonormalizing
/// symmetrically (X, J_ω X pairs kept).
class FrameField {
 public:
  FrameField(const Immersion& f, const Vector& p0, const AngleOptions& options = {},
             std::vector<double> rotations = {}, double gap_tol = 1e-5);

  const AdaptedFrame& base() const { return base_; }
  const PointGeometry& base_geometry() const { return base_geometry_; }
  /// Real frame in chart coordinates at p; FrameContinuationError when the
  /// rank changes or eigenvalue clusters collide.
  Matrix at(const Vector& p) const;

 private:
  struct Cluster {
    int begin, end;
    bool kernel;
  };
  const Immersion& f_;
  AngleOptions options_;
  double gap_tol_;
  PointGeometry base_geometry_;
  AdaptedFrame base_;
  std::vector<Cluster> clusters_;
};

/// Connection coefficients of a frame field at p0.
struct FrameConnection {
  /// real[k](i, j) = g_M(∇_{∂k} E_i, E_j)
  std::vector<Matrix> real;
  /// complex_[A](B, C) = <∇_{Z_A} Z_B, Z_C>, complex-bilinear, indices over
  /// Z_1..Z_n, Z_1bar..Z_nbar.
  std::vector<CMatrix> complex_;
  /// max |real[k] + real[k]^T|
  double antisymmetry_residual = 0.0;
};

FrameConnection frame_connection_coeffs(const Immersion& f, const FrameField& field,
                                        const Vector& p0,
                                        const FDScheme& scheme = FDScheme::first_derivative());
/// Same, for an arbitrary frame field given in chart coordinates.
FrameConnection frame_connection_coeffs(const Immersion& f,
                                        const std::function<Matrix(const Vector&)>& field,
                                        const Vector& p0,
                                        const FDScheme& scheme = FDScheme::first_derivative());

/// g(∇dF(A, B), J dF(C)) for complex chart vectors.
Complex sff_j_pairing(const PointGeometry& pg, const CVector& a, const CVector& b, const CVector& c);

/// ∇_Z F*ω(X, Y) = -g(∇dF(Z, X), JdF(Y)) + g(∇dF(Z, Y), JdF(X)).
Complex covariant_deriv_pullback(const PointGeometry& pg, const CVector& z, const CVector& x,
                                 const CVector& y);
double covariant_deriv_pullback(const Immersion& f, const Vector& p, const Vector& z, const Vector& x,
                                const Vector& y);
/// Components (k, a, b) of ∇F*ω from the second fundamental form.
Tensor3 covariant_deriv_pullback_tensor(const PointGeometry& pg);
/// Components (k, a, b) from differences of F*ω and the induced Christoffels.
Tensor3 covariant_deriv_pullback_fd(const Immersion& f, const Vector& p,
                                    const FDScheme& scheme = FDScheme::first_derivative());

/// Riemann tensor of g_M by differencing the induced Christoffels.
CurvatureTensor intrinsic_curvature_fd(const Immersion& f, const Vector& p,
                                       const FDScheme& scheme = FDScheme::first_derivative());

}  // namespace kahler
