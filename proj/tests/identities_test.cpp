#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "kahler_lens/catalog.hpp"
#include "kahler_lens/identities.hpp"

namespace kahler {
namespace {

Vector pt(double x, double y) {
  Vector p(2);
  p << x, y;
  return p;
}

Vector pt4(double a, double b, double c, double d) {
  Vector p(4);
  p << a, b, c, d;
  return p;
}

std::vector<Vector> grid(const Immersion& f, int k, double shrink = 0.8) {
  const Box b = f.domain();
  const Vector c = 0.5 * (b.lower + b.upper);
  const Vector h = 0.5 * shrink * (b.upper - b.lower);
  std::vector<Vector> out;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      Vector p = c;
      p[0] += h[0] * (2.0 * i / (k - 1) - 1.0);
      p[1] += h[1] * (2.0 * j / (k - 1) - 1.0);
      out.push_back(p);
    }
  return out;
}

ImmersionPtr generic(const std::string& amb) { return build("generic-graph", {{"ambient", amb}}); }

TEST(Reports, FormatDoubleIsShortestRoundTripAtSeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  for (double x : {-2.5e-300, 1.0 / 3.0, 6.02214076e23, -0.0}) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    EXPECT_EQ(format_double(x), buf);
  }
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Reports, JsonAndCsvCarrySchemaAndVerdict) {
  const auto f = build("nonminimal-graph");
  const IdentityReport r = check_minimality(*f, pt(0.2, 0.1));
  EXPECT_EQ(r.verdict, Verdict::Fail);
  const auto j = r.to_json();
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(j["id"], "minimality");
  EXPECT_EQ(j["verdict"], "fail");
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.rfind("1,minimality,0.20000000000000001;0.10000000000000001,", 0), 0u);
  EXPECT_NE(IdentityReport::csv_header().find("skip_reason"), std::string::npos);
}

TEST(Reports, SkipReasonWithCommaIsQuoted) {
  IdentityReport r;
  r.id = "x";
  r.skip_reason = "a, \"b\"";
  EXPECT_NE(r.to_csv().find("\"a, \"\"b\"\"\""), std::string::npos);
}

TEST(Registry, ResolvesAllListsAndRejectsUnknown) {
  const auto all = resolve_identities("all");
  EXPECT_EQ(all.size(), identity_catalog().size());
  const auto two = resolve_identities("gauss-flat, ricci-lemma,gauss-flat");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], "gauss-flat");
  EXPECT_THROW(resolve_identities("ricci-lemma,no-such-check"), UnknownIdError);
  EXPECT_THROW(run_identity("nope", *build("weierstrass"), {pt(0, 0)}), UnknownIdError);
}

TEST(Gates, MinimalityOnNegativeControlAndWeierstrass) {
  const auto bad = build("nonminimal-graph");
  for (const Vector& p : grid(*bad, 3)) EXPECT_EQ(check_minimality(*bad, p).verdict, Verdict::Fail);
  const auto w = build("weierstrass");
  for (const Vector& p : grid(*w, 3)) EXPECT_LT(check_minimality(*w, p).residual, 1e-8);
}

TEST(Gates, PluriminimalityIsVacuousOnLagrangianStratum) {
  const auto f = build("lagrangian-plane");
  const auto r = pluriminimal_residual(*f, pt(0.1, 0.2));
  EXPECT_TRUE(r.vacuous);
  EXPECT_EQ(r.rank, 0);
}

TEST(Gates, PluriminimalitySamplesJPrimeOnKernel) {
  const auto f = build("product");  // lambda 1/2 x lambda 1: rank 1, kernel of dimension 2
  const auto r = pluriminimal_residual(*f, pt4(0.1, 0.2, -0.3, 0.1), 8, 3);
  EXPECT_EQ(r.rank, 1);
  EXPECT_EQ(r.samples, 10);
  EXPECT_LT(r.residual, 1e-12);
}

TEST(Gates, GenericMinimalSurfaceInC4IsNotPluriminimal) {
  const auto f = build("orthogonal-complex-surface");
  const auto r = check_pluriminimality(*f, pt4(0.1, -0.1, 0.2, 0.05));
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_GT(r.residual, 0.1);
}

TEST(Gates, WeierstrassIsPluriminimal) {
  const auto f = build("weierstrass");
  EXPECT_EQ(check_pluriminimality(*f, pt(0.1, 0.2)).verdict, Verdict::Pass);
}

TEST(RicciLemma, RelativeResidualOnCurvedAndFlatAmbients) {
  for (const std::string amb : {"cp2:fs", "diskxdisk", "flat:C4"}) {
    const auto f = generic(amb);
    int checked = 0;
    for (const Vector& p : certification_points(*f)) {
      const auto r = check_ricci_lemma(*f, p);
      if (r.verdict == Verdict::Skipped) continue;
      ++checked;
      EXPECT_LT(r.relative_residual, 1e-5) << amb;
      EXPECT_TRUE(r.relative);
    }
    EXPECT_GE(checked, 5) << amb;
  }
}

TEST(RicciLemma, CliffordTorusRecoversEinsteinConstant) {
  const auto f = build("clifford-lagrangian-cp2");
  const auto r = check_ricci_lemma(*f, pt(0.7, 2.1));
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_GT(r.details["max_abs_ricci"].get<double>(), 0.5);
}

TEST(RicciLemma, SkipsAtComplexDirections) {
  const auto f = build("complex-graph");
  const auto r = check_ricci_lemma(*f, pt(0.2, 0.1));
  EXPECT_EQ(r.verdict, Verdict::Skipped);
}

TEST(TotallyGeodesicPsi, NonVacuousInBidisk) {
  for (const std::string id : {"geodesic-product-disk", "antidiagonal-disk"}) {
    const auto f = build(id);
    const auto r = check_totally_geodesic_psi(*f, grid(*f, 4));
    EXPECT_EQ(r.verdict, Verdict::Pass) << id;
    EXPECT_LT(r.lhs[0], 1e-6);
    EXPECT_GT(r.details["min_psi_norm"].get<double>(), 0.1);
  }
}

TEST(TotallyGeodesicPsi, SkipsWhenNotTotallyGeodesic) {
  const auto f = build("weierstrass");
  EXPECT_EQ(check_totally_geodesic_psi(*f, grid(*f, 2)).verdict, Verdict::Skipped);
}

TEST(GtildeDerivatives, SimpleSpectra) {
  for (const std::string id : {"weierstrass", "lambda-graph-family", "orthogonal-complex-surface"}) {
    const auto f = build(id);
    for (const Vector& p : certification_points(*f)) {
      const auto r = check_gtilde_derivatives(*f, p);
      ASSERT_NE(r.verdict, Verdict::Skipped) << id << " " << r.skip_reason;
      EXPECT_LT(r.residual, 1e-4) << id;
    }
  }
}

TEST(GtildeDerivatives, SkipsNearEigenvalueCollision) {
  const auto w = build("weierstrass");
  const double c0 = kahler_angles(*w, pt(0.1, 0.1)).cosines[0];
  const auto both = std::make_shared<ProductImmersion>(w, w);
  const double dx = 2e-5;
  const Vector p = pt4(0.1, 0.1, 0.1 + dx, 0.1);
  const auto spec = kahler_angles(*both, p);
  ASSERT_GT(spec.cosines[0] - spec.cosines[1], 1e-6);
  ASSERT_LT(spec.cosines[0] - spec.cosines[1], 1e-3);
  EXPECT_NEAR(spec.cosines[0], c0, 1e-3);
  const auto r = check_gtilde_derivatives(*both, p);
  EXPECT_EQ(r.verdict, Verdict::Skipped);
  EXPECT_NE(r.skip_reason.find("collide"), std::string::npos);
}

TEST(GtildeDerivatives, ExactTieIsOneCluster) {
  const auto w = build("weierstrass");
  const auto both = std::make_shared<ProductImmersion>(w, w);
  const auto r = check_gtilde_derivatives(*both, pt4(0.1, 0.1, 0.1, 0.1));
  ASSERT_NE(r.verdict, Verdict::Skipped) << r.skip_reason;
  EXPECT_LT(r.residual, 1e-4);
}

TEST(DkappaFormula, WeierstrassAndLambdaFamily) {
  for (const std::string id : {"weierstrass", "lambda-graph-family"}) {
    const auto f = build(id);
    for (const Vector& p : grid(*f, 3)) {
      const auto r = check_dkappa_formula(*f, p);
      ASSERT_EQ(r.verdict, Verdict::Pass) << id << " " << r.skip_reason;
      EXPECT_LT(r.residual, 1e-4);
    }
  }
}

TEST(DkappaFormula, LambdaFamilyMatchesSymbolicGradient) {
  // |2 dκ(Z_1)|^2 = |dκ|^2 for any unit Z = (X - iY)/2, so compare norms.
  const auto f = build("lambda-graph-family");
  const Vector p = pt(0.2, -0.1);
  const auto r = check_dkappa_formula(*f, p);
  ASSERT_EQ(r.verdict, Verdict::Pass);
  const Matrix gi = induced_metric(*f, p).inverse();
  Vector dk(2);
  dk << -0.55835383375463171263, -0.39740658648682499876;
  const double norm2 = dk.dot(gi * dk);
  const double lhs = r.lhs[0] * r.lhs[0] + r.lhs[1] * r.lhs[1];
  EXPECT_NEAR(lhs, norm2, 1e-8);
}

TEST(DeltaKappaPluriminimal, ZeroCurvatureFixtures) {
  for (const std::string id : {"weierstrass", "rotated-j-curve"}) {
    const auto f = build(id);
    for (const Vector& p : grid(*f, 3, 0.6)) {
      const auto r = check_delta_kappa_pluriminimal(*f, p);
      ASSERT_EQ(r.verdict, Verdict::Pass) << id << " " << r.skip_reason;
      EXPECT_LT(r.residual, 1e-3);
      EXPECT_EQ(r.lhs.size(), 2u);
    }
  }
}

TEST(DeltaKappaPluriminimal, NegativeEinsteinMatchesSymbolicLaplacian) {
  const auto f = build("antiholomorphic-disk-graph");
  struct Case {
    Vector p;
    double cos, lap;
  };
  const Case cases[] = {{pt(0.1, -0.2), 0.7997603125212210785, 1.599520625042442157},
                        {pt(-0.25, 0.3), 0.9233118870618695231, 1.846623774123739046}};
  for (const auto& c : cases) {
    EXPECT_NEAR(kahler_angles(*f, c.p).cosines[0], c.cos, 1e-12);
    const auto r = check_delta_kappa_pluriminimal(*f, c.p);
    ASSERT_EQ(r.verdict, Verdict::Pass) << r.skip_reason;
    EXPECT_NEAR(r.details["laplacian"].get<double>(), c.lap, 1e-5);
    EXPECT_NEAR(r.details["ricci_sum"].get<double>(), c.lap, 1e-10);
    EXPECT_NEAR(r.details["einstein"].get<double>(), c.lap, 1e-10);
  }
}

TEST(DeltaKappaPluriminimal, GatedOnMinimality) {
  const auto f = build("nonminimal-graph");
  for (const Vector& p : grid(*f, 3)) {
    const auto r = check_delta_kappa_pluriminimal(*f, p);
    EXPECT_EQ(r.verdict, Verdict::Skipped);
  }
  const auto g = build("orthogonal-complex-surface");
  const auto r = check_delta_kappa_pluriminimal(*g, pt4(0.1, 0, 0, 0.1));
  EXPECT_EQ(r.verdict, Verdict::Skipped);
  EXPECT_NE(r.skip_reason.find("pluriminimal"), std::string::npos);
}

TEST(DeltaKappaMinimal, FiveTermsAgreeWithLaplacianInC4) {
  const auto f = build("orthogonal-complex-surface");
  for (const Vector& p : certification_points(*f)) {
    const auto r = check_delta_kappa_minimal(*f, p);
    ASSERT_EQ(r.verdict, Verdict::Pass) << r.skip_reason;
    EXPECT_LT(r.residual, 1e-3);
    EXPECT_GT(std::abs(r.details["product"].get<double>()), 0.1);
    EXPECT_GT(std::abs(r.details["difference"].get<double>()), 0.1);
    EXPECT_GT(std::abs(r.details["connection"].get<double>()), 0.1);
  }
}

TEST(DeltaKappaMinimal, WeierstrassAndNegativeCurvature) {
  for (const std::string id : {"weierstrass", "antiholomorphic-disk-graph"}) {
    const auto f = build(id);
    for (const Vector& p : grid(*f, 3, 0.6)) {
      const auto r = check_delta_kappa_minimal(*f, p);
      ASSERT_EQ(r.verdict, Verdict::Pass) << id << " " << r.skip_reason;
      EXPECT_LT(r.residual, 1e-3);
    }
  }
}

TEST(DeltaKappaMinimal, TermsAreRealAndCovariantUnderEigenspaceRotation) {
  const auto f = build("orthogonal-complex-surface");
  const Vector p = pt4(0.1, -0.05, 0.2, 0.0);
  const auto a = delta_kappa_minimal_terms(*f, p);
  const auto b = delta_kappa_minimal_terms(*f, p, {}, {0.7, -2.3});
  EXPECT_LT(std::abs(a.total().imag()), 1e-10);
  EXPECT_LT(std::abs(a.total() - b.total()), 1e-8);
  const auto r = check_delta_kappa_minimal_covariance(*f, p);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(ConstantAngleObstruction, FlatPassesAndDeclaredNegativeCurvatureFails) {
  const auto f = build("rotated-j-curve");
  const auto pts = grid(*f, 3);
  const auto ok = check_constant_angle_obstruction(*f, pts);
  EXPECT_EQ(ok.verdict, Verdict::Pass) << ok.skip_reason;
  EXPECT_NEAR(ok.details["sum_cos"].get<double>(), 0.5, 1e-12);

  const auto synthetic = with_declared_einstein_constant(f, -1.0);
  const auto bad = check_constant_angle_obstruction(*synthetic, pts);
  EXPECT_EQ(bad.verdict, Verdict::Fail);
  EXPECT_NEAR(bad.lhs[0], -0.5, 1e-12);
}

TEST(ConstantAngleObstruction, GateSkips) {
  const auto lag = build("lagrangian-plane");
  EXPECT_EQ(check_constant_angle_obstruction(*lag, grid(*lag, 2)).verdict, Verdict::Skipped);
  const auto w = build("weierstrass");
  EXPECT_EQ(check_constant_angle_obstruction(*w, grid(*w, 2)).verdict, Verdict::Skipped);
  const auto c = build("complex-graph");
  EXPECT_EQ(check_constant_angle_obstruction(*c, grid(*c, 2)).verdict, Verdict::Skipped);
}

TEST(KahlernessCriteria, RotatedCurveSatisfiesAll) {
  const auto f = build("rotated-j-curve");
  for (const Vector& p : grid(*f, 3)) {
    const auto r = check_kahlerness_criteria(*f, p);
    ASSERT_EQ(r.verdict, Verdict::Pass) << r.skip_reason;
    EXPECT_TRUE(r.details["type_11"].get<bool>());
    EXPECT_TRUE(r.details["symmetric"].get<bool>());
    EXPECT_TRUE(r.details["parallel_j_omega"].get<bool>());
  }
}

TEST(KahlernessCriteria, OutcomesAgreeOnGenericFixtures) {
  for (const std::string id : {"weierstrass", "orthogonal-complex-surface", "lambda-graph-family"}) {
    const auto f = build(id);
    for (const Vector& p : certification_points(*f)) {
      const auto r = check_kahlerness_criteria(*f, p);
      ASSERT_EQ(r.verdict, Verdict::Pass) << id << " " << r.skip_reason;
      EXPECT_TRUE(r.details["agree"].get<bool>());
    }
  }
  const auto f = build("orthogonal-complex-surface");
  EXPECT_FALSE(check_kahlerness_criteria(*f, pt4(0, 0, 0, 0)).details["type_11"].get<bool>());
}

TEST(KahlernessCriteria, SkipsOnDegenerateForm) {
  const auto f = build("lagrangian-plane");
  EXPECT_EQ(check_kahlerness_criteria(*f, pt(0, 0)).verdict, Verdict::Skipped);
}

TEST(GaussFlat, NontrivialSurfaceInC4) {
  const auto f = build("orthogonal-complex-surface");
  for (const Vector& p : certification_points(*f)) {
    const auto r = check_gauss_flat(*f, p);
    ASSERT_EQ(r.verdict, Verdict::Pass) << r.skip_reason;
    EXPECT_GT(std::abs(r.rhs[0]), 0.01);
    EXPECT_LT(r.rhs[0], 0.0);
  }
}

TEST(GaussFlat, AffinePlaneAndWeierstrass) {
  const auto plane = build("lagrangian-plane");
  const auto r0 = check_gauss_flat(*plane, pt(0.3, 0.3));
  EXPECT_EQ(r0.verdict, Verdict::Pass);
  EXPECT_EQ(r0.rhs[0], 0.0);
  const auto w = build("weierstrass");
  EXPECT_LT(check_gauss_flat(*w, pt(0.1, -0.2)).residual, 1e-3);
}

TEST(GaussFlat, AdditiveOverProductFactors) {
  const auto a = build("orthogonal-complex-surface");
  const auto w = build("weierstrass");
  const auto prod = std::make_shared<ProductImmersion>(a, w);
  const Vector pa = pt4(0.1, -0.05, 0.2, 0.0);
  const Vector pw = pt(0.1, 0.2);
  Vector p(6);
  p << pa, pw;
  const auto r = check_gauss_flat(*prod, p);
  const auto ra = check_gauss_flat(*a, pa);
  const auto rw = check_gauss_flat(*w, pw);
  ASSERT_EQ(r.verdict, Verdict::Pass) << r.skip_reason;
  EXPECT_NEAR(r.lhs[0], ra.lhs[0] + rw.lhs[0], 1e-6);
  EXPECT_NEAR(r.rhs[0], ra.rhs[0] + rw.rhs[0], 1e-10);
}

TEST(Gates, ServeBoundaryAsSkipNotError) {
  const auto f = build("weierstrass");
  const auto reports = run_identity("delta-kappa-pluriminimal", *f, {pt(0.5, 0.0)});
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].verdict, Verdict::Skipped);
}

TEST(Gates, LooseningTolerancesNeverTurnsPassIntoSkip) {
  const auto f = build("antiholomorphic-disk-graph");
  const auto pts = grid(*f, 2, 0.5);
  IdentityOptions tight;
  IdentityOptions loose;
  loose.tol_alg *= 100;
  loose.tol_fd *= 100;
  loose.tol_fd_first *= 100;
  loose.gate_tol *= 100;
  for (const auto& id : resolve_identities("all")) {
    const auto a = run_identity(id, *f, pts, tight);
    const auto b = run_identity(id, *f, pts, loose);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].verdict == Verdict::Pass) EXPECT_EQ(b[i].verdict, Verdict::Pass) << id;
      if (a[i].verdict != Verdict::Skipped) EXPECT_NE(b[i].verdict, Verdict::Skipped) << id;
    }
  }
}

TEST(Determinism, RepeatedRunsSerializeIdentically) {
  const auto f = build("orthogonal-complex-surface");
  const auto pts = certification_points(*f);
  std::ostringstream a, b;
  for (const auto& id : resolve_identities("all")) {
    write_jsonl(a, run_identity(id, *f, pts));
    write_jsonl(b, run_identity(id, *f, pts));
  }
  EXPECT_EQ(a.str(), b.str());
  EXPECT_FALSE(a.str().empty());
}

}  // namespace
}  // namespace kahler
