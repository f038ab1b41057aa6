#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kahler_lens/finite_difference.hpp"
#include "kahler_lens/immersion.hpp"
#include "test_fixtures.hpp"

namespace kahler {
namespace {

using namespace fixtures;

TEST(Immersion, LagrangianPlaneMetricIsIdentity) {
  const Matrix g = induced_metric(*lagrangian_plane(), Vector::Constant(2, 0.3));
  EXPECT_LT((g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Immersion, LambdaGraphMetric) {
  // (1 + λ^2)(dx^2 + dy^2) at λ = 1/2
  const Matrix g = induced_metric(*lambda_graph(0.5), Vector::Constant(2, -0.4));
  EXPECT_LT((g - 1.25 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Immersion, WeierstrassMatchesExactAntiderivative) {
  // Exact polynomial antiderivative of the null curve, evaluated at (1/5, 1/10).
  const double f_oracle[4] = {0.15458469333333333, -0.022370436666666667, 0.04863791666666667,
                              -0.082056666666666667};
  const double df_oracle[4][2] = {{0.81483950000000005, -0.037336000000000001},
                                  {0.017336000000000001, -0.22516050000000001},
                                  {0.23669999999999999, 0.00064999999999999997},
                                  {-0.041750000000000002, -0.81850000000000001}};
  const double gm_oracle = 0.72203390015625002;
  auto w = default_weierstrass();
  Vector p(2);
  p << 0.2, 0.1;
  const Vector f = w->map(p);
  for (int l = 0; l < 4; ++l) EXPECT_NEAR(f[l], f_oracle[l], 1e-13);
  const Jet jet = w->jet(p);
  for (int l = 0; l < 4; ++l)
    for (int a = 0; a < 2; ++a) EXPECT_NEAR(jet.df(l, a), df_oracle[l][a], 1e-15);
  const Matrix g = induced_metric(*w, p);
  EXPECT_NEAR(g(0, 0), gm_oracle, 1e-10);
  EXPECT_NEAR(g(1, 1), gm_oracle, 1e-10);
  EXPECT_NEAR(g(0, 1), 0.0, 1e-10);
}

TEST(Immersion, WeierstrassNullCurve) {
  auto w = std::static_pointer_cast<const WeierstrassImmersion>(default_weierstrass());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 20; ++t) {
    const Complex z(u(rng), u(rng));
    const CVector phi = w->phi(z);
    EXPECT_LT(std::abs((phi.array() * phi.array()).sum()), 1e-12);
  }
}

TEST(Immersion, AffineImmersionIsTotallyGeodesic) {
  const auto sff = second_fundamental_form(*lambda_graph(0.7), Vector::Constant(2, 0.1));
  EXPECT_EQ(sff.values.max_abs(), 0.0);
}

TEST(Immersion, SphereMeanCurvatureNorm) {
  for (double r : {1.0, 2.5}) {
    Vector p(2);
    p << 1.1, 0.4;
    EXPECT_NEAR(minimality_residual(*sphere(r), p), 2.0 / r, 1e-6);
    // FD jets give the same
    EXPECT_NEAR(minimality_residual(*with_fd_jets(sphere(r)), p), 2.0 / r, 1e-6);
  }
}

TEST(Immersion, HolomorphicCurveSecondFundamentalFormIsNormalAndJAntilinear) {
  auto curve = std::make_shared<HolomorphicGraphImmersion>(
      flat2(), std::vector<ComplexPolynomial>{ComplexPolynomial::univariate({0.0, 0.0, 1.0})},
      Matrix::Identity(4, 4), unit_box(2), "holomorphic-curve");
  Vector p(2);
  p << 0.3, -0.2;
  const PointGeometry pg = point_geometry(*curve, p);
  EXPECT_LT(pg.normality_residual, 1e-14);
  // B(X, X) + B(JX, JX) = 0 with J the induced complex structure (∂x -> ∂y)
  for (int l = 0; l < 4; ++l) EXPECT_NEAR(pg.sff(l, 0, 0) + pg.sff(l, 1, 1), 0.0, 1e-14);
  EXPECT_GT(pg.sff.max_abs(), 0.1);
}

TEST(Immersion, NonHarmonicGraphIsNotMinimal) {
  // graph of x^2: |H| = u'' / (1 + u'^2)^{3/2} = 2 / 5^{3/2} at x = 1
  Vector p(2);
  p << 1.0, 0.0;
  const double r = minimality_residual(*x_squared_graph(), p);
  EXPECT_GT(r, 0.1);
  EXPECT_NEAR(r, 2.0 / std::pow(5.0, 1.5), 1e-14);
}

TEST(Immersion, WeierstrassIsMinimal) {
  auto w = default_weierstrass();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  for (int t = 0; t < 10; ++t) {
    Vector p(2);
    p << u(rng), u(rng);
    EXPECT_LT(minimality_residual(*w, p), 1e-8);
  }
}

TEST(Immersion, NormalProjectionExamples) {
  auto plane = lagrangian_plane();
  const Vector p = Vector::Constant(2, 0.2);
  Vector v(4);
  v << 0, 1, 0, 0;
  EXPECT_LT((normal_projection(*plane, p, v) - v).norm(), 1e-15);
  Vector t(4);
  t << 2, 0, 0, -3;
  EXPECT_LT(normal_projection(*plane, p, t).norm(), 1e-15);
}

TEST(Immersion, ProjectionIsIdempotentAndSymmetric) {
  auto w = default_weierstrass();
  Vector p(2);
  p << -0.3, 0.25;
  const PointGeometry pg = point_geometry(*w, p);
  const Matrix& pr = pg.projection;
  EXPECT_LT((pr * pr - pr).cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 10; ++t) {
    Vector a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = n01(rng);
      b[i] = n01(rng);
    }
    EXPECT_NEAR((pr * a).dot(pg.g * b), a.dot(pg.g * (pr * b)), 1e-12);
    EXPECT_LT((pg.jet.df.transpose() * pg.g * (pr * a)).norm(), 1e-12);
  }
}

TEST(Immersion, FiniteDifferenceJetsAgreeWithAnalytic) {
  const double h1 = fd::first_derivative_step();
  const double h2 = fd::second_derivative_step();
  const std::vector<ImmersionPtr> cases = {default_weierstrass(), sphere(1.0), x_squared_graph()};
  Vector p(2);
  p << 0.31, 0.27;
  for (const auto& f : cases) {
    const Jet a = f->jet(p);
    const Jet b = f->fd_jet(p);
    EXPECT_TRUE(a.analytic);
    EXPECT_FALSE(b.analytic);
    EXPECT_LT((a.df - b.df).cwiseAbs().maxCoeff(), 100 * std::pow(h1, 4)) << f->id();
    EXPECT_LT((a.d2f - b.d2f).max_abs(), 100 * std::pow(h2, 4)) << f->id();
  }
}

TEST(Immersion, CodazziNormalPartVanishesInFlatSpace) {
  // (∇_a B)(b, c) - (∇_b B)(a, c) has no normal component for flat N.
  auto w = default_weierstrass();
  Vector p(2);
  p << 0.1, -0.2;
  const PointGeometry pg = point_geometry(*w, p);
  const double h = 1e-3;
  std::vector<Tensor3> db;
  for (int k = 0; k < 2; ++k)
    db.push_back(fd::partial([&](const Vector& x) { return point_geometry(*w, x).sff; }, p, k, h));
  double worst = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c) {
        Vector v(4);
        for (int l = 0; l < 4; ++l) {
          double s = db[a](l, b, c) - db[b](l, a, c);
          for (int r = 0; r < 2; ++r)
            s += -pg.gamma_m(r, a, b) * pg.sff(l, r, c) - pg.gamma_m(r, a, c) * pg.sff(l, b, r) +
                 pg.gamma_m(r, b, a) * pg.sff(l, r, c) + pg.gamma_m(r, b, c) * pg.sff(l, a, r);
          v[l] = s;
        }
        worst = std::max(worst, (pg.projection * v).norm());
      }
  EXPECT_LT(worst, 1e-8);
}

TEST(Immersion, RankDeficiencyIsReported) {
  auto degenerate = std::make_shared<PolynomialImmersion>(
      flat2(), std::vector<Polynomial>{linear(1, 0), linear(2, 0), Polynomial(), Polynomial()},
      unit_box(2));
  try {
    point_geometry(*degenerate, Vector::Zero(2));
    FAIL() << "expected DegenerateImmersionError";
  } catch (const DegenerateImmersionError& e) {
    EXPECT_LT(e.singular_value(), 1e-12);
  }
}

TEST(Immersion, DimensionAndDomainErrors) {
  EXPECT_THROW(std::make_shared<PolynomialImmersion>(
                   std::make_shared<const AmbientSpace>(make_ambient("flat:C4")),
                   std::vector<Polynomial>(8), unit_box(2)),
               DimensionError);
  EXPECT_THROW(point_geometry(*lagrangian_plane(), Vector::Constant(2, 3.0)), DomainError);
}

TEST(Immersion, PolynomialJsonWithRationalCoefficients) {
  const auto j = nlohmann::json::parse(R"({
    "ambient": "flat:C2",
    "components": [[["1", [1, 0]]], [["1", [0, 1]]], [["1/2", [1, 0]]], [["-1/2", [0, 1]]]]
  })");
  auto f = PolynomialImmersion::from_json(j);
  const Matrix g = induced_metric(*f, Vector::Zero(2));
  EXPECT_NEAR(g(0, 0), 1.25, 1e-15);
  EXPECT_THROW(parse_rational("1/0"), Error);
  EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(Immersion, ProductIsBlockDiagonal) {
  auto prod = std::make_shared<ProductImmersion>(lambda_graph(0.5), lambda_graph(1.0));
  EXPECT_EQ(prod->domain_dim(), 4);
  EXPECT_EQ(prod->ambient().real_dim(), 8);
  const Matrix g = induced_metric(*prod, Vector::Constant(4, 0.1));
  EXPECT_NEAR(g(0, 0), 1.25, 1e-15);
  EXPECT_NEAR(g(2, 2), 2.0, 1e-15);
  EXPECT_EQ(g(0, 2), 0.0);
}

}  // namespace
}  // namespace kahler
