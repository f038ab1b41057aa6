#pragma once

// Both sides of each identity evaluated at sample points, with residuals,
// tolerances, verdicts and gate skips.

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/angles.hpp"
#include "kahler_lens/calculus.hpp"
#include "kahler_lens/immersion.hpp"

namespace kahler {

inline constexpr int kReportSchemaVersion = 1;

enum class Verdict { Pass, Fail, Skipped };
std::string to_string(Verdict v);

struct IdentityReport {
  std::string id;
  Vector point;                 // empty for grid-level checks
  std::vector<double> lhs;      // complex values contribute (re, im)
  std::vector<double> rhs;
  double residual = 0.0;        // the measured one, see `relative`
  double absolute_residual = 0.0;
  double relative_residual = 0.0;  // absolute / max(|rhs|_inf, 1)
  bool relative = false;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Skipped;
  std::string skip_reason;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string to_csv() const;
};

struct IdentityOptions {
  double tol_alg = 1e-5;        // algebraic identities
  double tol_fd = 1e-3;         // identities through a finite-difference Laplacian
  double tol_fd_first = 1e-4;   // identities through first derivatives
  double tol_covariance = 1e-8;
  double gate_tol = 1e-6;       // minimality, pluriminimality, total geodesy
  FDScheme first = FDScheme::first_derivative();
  FDScheme laplacian = FDScheme::laplacian();
  AngleOptions angles;
  /// Adjacent distinct cosines closer than this make frame derivatives unreliable.
  double min_cluster_gap = 1e-3;
  /// Spread of the cosines over a grid below which angles count as constant.
  double constant_angle_tol = 1e-8;
  int j_prime_samples = 8;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Gates and diagnostics --------------------------------------------------------

struct PluriminimalResidual {
  double residual = 0.0;     // max over J' samples of |(∇dF)^(1,1)|
  double minimality = 0.0;   // |H|
  int rank = 0;              // k
  int samples = 0;
  bool vacuous = false;      // k = 0: no condition on this stratum
};

/// J' ranges over the canonical structure on K_ω, its negative and
/// `samples` Haar-random orthogonal complex structures drawn from `seed`.
PluriminimalResidual pluriminimal_residual(const Immersion& f, const Vector& p, int samples = 8,
                                           std::uint64_t seed = 0, const AngleOptions& options = {});

/// Max |∇dF| over a g_M-orthonormal frame, in the ambient metric.
double second_fundamental_form_norm(const Immersion& f, const Vector& p);

// Pointwise checks ---------------------------------------------------------------

IdentityReport check_minimality(const Immersion& f, const Vector& p, const IdentityOptions& o = {});
IdentityReport check_pluriminimality(const Immersion& f, const Vector& p,
                                     const IdentityOptions& o = {});
/// Ricci^N(U, V) = Σ_μ 4/sin²θ_μ R(U, JV, dF(μ), JdF(μ̄) + i cosθ_μ dF(μ̄)).
IdentityReport check_ricci_lemma(const Immersion& f, const Vector& p, const IdentityOptions& o = {});
/// Derivatives of g̃ in the continued frame at p0 against the
/// second-fundamental-form expressions.
IdentityReport check_gtilde_derivatives(const Immersion& f, const Vector& p,
                                        const IdentityOptions& o = {});
/// 2 dκ(Z) = Σ_μ 8i/sin²θ_μ (g(∇dF(Z, μ), JdF(μ̄)) - g(∇dF(Z, μ̄), JdF(μ))).
IdentityReport check_dkappa_formula(const Immersion& f, const Vector& p,
                                    const IdentityOptions& o = {});
/// Δκ = 4i Σ_β Ricci(JdF(β), dF(β̄)) = -2R Σ cosθ_β.
IdentityReport check_delta_kappa_pluriminimal(const Immersion& f, const Vector& p,
                                              const IdentityOptions& o = {});
/// Δκ against the five-term expansion for minimal immersions.
IdentityReport check_delta_kappa_minimal(const Immersion& f, const Vector& p,
                                         const IdentityOptions& o = {});
/// Five-term expansion in the adapted frame vs. a frame rotated inside each
/// eigenspace.
IdentityReport check_delta_kappa_minimal_covariance(const Immersion& f, const Vector& p,
                                                    const IdentityOptions& o = {});
/// (a) ∇_Z F*ω of type (1,1), (b) symmetry of g(∇dF(Z, ·), JdF(·)) on
/// T^{1,0}, (c) <(∇_Z J_ω) α, β> = 0 hold or fail together.
IdentityReport check_kahlerness_criteria(const Immersion& f, const Vector& p,
                                         const IdentityOptions& o = {});
/// Flat ambient: Σ R^M(μ, α, μ̄, ᾱ) = -Σ |∇dF(α, μ̄)|².
IdentityReport check_gauss_flat(const Immersion& f, const Vector& p, const IdentityOptions& o = {});

// Grid checks ----------------------------------------------------------------------

/// Totally geodesic without complex directions: F*Ψ = 0, Ψ(U, V) = Ricci(JU, V).
IdentityReport check_totally_geodesic_psi(const Immersion& f, const std::vector<Vector>& points,
                                          const IdentityOptions& o = {});
/// Constant angles, pluriminimal, not Lagrangian, no complex directions:
/// R Σ cosθ must vanish.
IdentityReport check_constant_angle_obstruction(const Immersion& f, const std::vector<Vector>& points,
                                                const IdentityOptions& o = {});

/// Five-term right-hand side for Δκ at p0 (frame rotated by `rotations`).
struct DeltaKappaTerms {
  Complex ricci, curvature, product, difference, connection;
  Complex total() const { return ricci + curvature + product + difference + connection; }
};
DeltaKappaTerms delta_kappa_minimal_terms(const Immersion& f, const Vector& p,
                                          const IdentityOptions& o = {},
                                          const std::vector<double>& rotations = {});

// Registry ---------------------------------------------------------------------------

struct IdentityInfo {
  std::string id;
  std::string description;
  bool grid = false;
};

const std::vector<IdentityInfo>& identity_catalog();
/// Expands "all" and comma-separated lists; UnknownIdError on unknown ids.
std::vector<std::string> resolve_identities(const std::string& selection);
/// One report per point for pointwise checks, one report for grid checks.
std::vector<IdentityReport> run_identity(const std::string& id, const Immersion& f,
                                         const std::vector<Vector>& points,
                                         const IdentityOptions& o = {});

void write_jsonl(std::ostream& out, const std::vector<IdentityReport>& reports);
void write_csv(std::ostream& out, const std::vector<IdentityReport>& reports);

/// %.17g, '.' decimal point, independent of locale.
std::string format_double(double x);

}  // namespace kahler
