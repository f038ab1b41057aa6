#pragma once

// Kähler angles: F*ω as a g_M-skew operator, its polar decomposition
// F*ω = g̃ J_ω, the ordered cosines, κ and adapted frames.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/immersion.hpp"

namespace kahler {

struct AngleOptions {
  double rank_tol = 1e-8;
  double complex_tol = 1e-8;
  double pairing_tol = 1e-8;
  /// Cosines closer than this share an eigenspace when building frames.
  double cluster_tol = 1e-6;
};

struct PulledBackForm {
  Matrix form;  // form(a, b) = F*ω(∂_a, ∂_b) = g(J dF ∂_a, dF ∂_b)
  Matrix op;    // A with g_M(A X, Y) = F*ω(X, Y)
  Matrix g_m;
};

PulledBackForm pullback_form(const Matrix& df, const Matrix& g, const Matrix& j);
PulledBackForm pullback_form(const PointGeometry& pg);
PulledBackForm pullback_form(const Immersion& f, const Vector& p);

struct PolarDecomposition {
  Matrix g_tilde;       // operator, chart basis
  Matrix j_omega;       // partial isometry, chart basis
  Matrix kernel_basis;  // g_M-orthonormal columns spanning K_ω
  Vector singular_values;  // of the gauge operator, descending
  int rank = 0;         // real rank of F*ω
  // Gauge data: x_gauge = gauge * x_chart makes g_M the identity.
  Matrix gauge;
  Matrix gauge_inv;
  Matrix eigvecs;       // right singular vectors in the gauge, by descending value
  Matrix j_gauge;
};

/// Total function; the zero operator gives g̃ = 0, J_ω = 0 and a full kernel.
PolarDecomposition polar_decompose(const Matrix& op, const Matrix& g_m, double rank_tol = 1e-8);
PolarDecomposition polar_decompose(const PulledBackForm& form, double rank_tol = 1e-8);

struct AngleSpectrum {
  Vector cosines;  // n values, descending, in [0, 1]
  int rank = 0;    // k: the point lies in Ω_2k
  Matrix g_tilde;
  Matrix j_omega;
  Matrix kernel_basis;
  double pairing_residual = 0.0;

  int n() const { return static_cast<int>(cosines.size()); }
  nlohmann::json to_json(double complex_tol = 1e-8) const;
};

/// Pairs the doubled singular values; DegenerateSpectrumError if the pairing
/// residual exceeds options.pairing_tol.
AngleSpectrum angle_spectrum(const PulledBackForm& form, const AngleOptions& options = {});
AngleSpectrum kahler_angles(const Immersion& f, const Vector& p, const AngleOptions& options = {});

/// Σ log((1 + c) / (1 - c)); ComplexDirectionError if max c >= 1 - complex_tol.
double kappa_from_cosines(const Vector& cosines, double complex_tol = 1e-8);
/// 1/2 log(det(I + g̃) / det(I - g̃)) in the g_M-orthonormal gauge.
double kappa_from_determinants(const PolarDecomposition& polar, double complex_tol = 1e-8);
double kappa(const Immersion& f, const Vector& p, const AngleOptions& options = {});

/// det(I ± g̃) in the gauge minus Π (1 ± c)^2; returns the larger mismatch
/// relative to the product.
double determinant_identity_residual(const PolarDecomposition& polar, const Vector& cosines);

enum class DirectionLabel { Complex, Lagrangian, Intermediate };
std::string to_string(DirectionLabel label);

struct DirectionClassification {
  std::vector<DirectionLabel> labels;
  bool has_complex = false;
  bool has_lagrangian = false;
  bool is_lagrangian_point = false;
  bool is_complex_point = false;
};

DirectionClassification classify_directions(const Vector& cosines, double tol = 1e-8);
DirectionClassification classify_directions(const Immersion& f, const Vector& p,
                                            double tol = 1e-8);

struct AdaptedFrame {
  Vector base_point;
  Vector cosines;
  int rank = 0;
  Matrix real_frame;     // m x m, columns X_1, Y_1, X_2, Y_2, ...
  CMatrix complex_frame; // m x 2n, columns Z_1..Z_n, then Z_1bar..Z_nbar
  /// N x 2n, U_α then U_αbar; empty when some direction is complex.
  std::optional<CMatrix> normal_frame;
};

/// Coefficients of Z_α = (X_α - i Y_α)/2 and conjugates in a real frame basis.
CMatrix complex_frame_coefficients(int m);

/// Frame of eigenvectors of g̃ paired by J_ω, completed on the kernel.
/// Optional per-pair rotation angles rotate (X_α, Y_α) by e^{iθ} inside
/// each eigenspace.
Matrix adapted_real_frame(const PolarDecomposition& polar, const AngleOptions& options,
                          const std::vector<double>& rotations = {});

AdaptedFrame adapted_frame(const Immersion& f, const Vector& p, const AngleOptions& options = {},
                           bool require_normal_frame = false);
AdaptedFrame adapted_frame(const PointGeometry& pg, const AngleOptions& options = {},
                           bool require_normal_frame = false,
                           const std::vector<double>& rotations = {});

/// Determinant of the Hermitian Gram matrix of {dF(α), dF(ᾱ), U_α, U_ᾱ}
/// normalized by the product of the diagonal entries.
double normal_frame_gram_determinant(const PointGeometry& pg, const AdaptedFrame& frame);

struct PfaffianSign {
  int epsilon = 1;
  double s2 = 0.0;
  double wedge_ratio = 0.0;   // (F*ω)^2 / (2 Vol)
  double residual = 0.0;      // |wedge_ratio - ε c1 c2|
  bool split_smooth = true;   // false when c1 = c2 within tolerance
};

/// n = 2 only. orientation = ±1 is the sign of the chart orientation.
/// With strict = true, equal cosines raise DegenerateSpectrumError.
PfaffianSign pfaffian_sign(const Immersion& f, const Vector& p, int orientation = 1,
                           bool strict = false, const AngleOptions& options = {});
PfaffianSign pfaffian_sign(const PulledBackForm& form, int orientation = 1, bool strict = false,
                           const AngleOptions& options = {});

}  // namespace kahler
