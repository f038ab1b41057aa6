#include <gtest/gtest.h>

#include <cmath>

#include "kahler_lens/calculus.hpp"
#include "test_fixtures.hpp"

namespace kahler {
namespace {

using namespace fixtures;

Vector point(double x, double y) {
  Vector p(2);
  p << x, y;
  return p;
}

TEST(Calculus, SchemeValidation) {
  EXPECT_THROW((FDScheme{0.0, 4, false}.validate()), Error);
  EXPECT_THROW((FDScheme{1e-3, 3, false}.validate()), Error);
  EXPECT_NO_THROW(FDScheme::laplacian().validate());
  EXPECT_DOUBLE_EQ(FDScheme::laplacian().reach(), 2e-2);
}

TEST(Calculus, DifferentialOfAffineAndConstant) {
  auto plane = lagrangian_plane();
  const Vector d = fd_differential([](const Vector& x) { return 3 * x[0] - 2 * x[1]; }, *plane, point(0.3, 0.1));
  EXPECT_NEAR(d[0], 3.0, 1e-12);
  EXPECT_NEAR(d[1], -2.0, 1e-12);
  EXPECT_EQ(fd_differential([](const Vector&) { return 1.5; }, *plane, point(0.3, 0.1)).norm(), 0.0);
}

TEST(Calculus, DifferentialOfKappaOnVaryingFamily) {
  // graph (x, y, x/2 + 3x^2/20, -y/2 - y^2/10); exact values from symbolic differentiation
  auto f = lambda_family(0.5, 0.15, 0.1);
  const struct {
    double x, y, kappa, dx, dy;
  } cases[] = {{0.2, -0.1, 1.3103709155260235001, -0.55835383375463171263, -0.39740658648682499876},
               {-0.3, 0.25, 1.4758933231749562726, -0.65997710727328874573, -0.39458439360508180877}};
  ScalarField k = [&](const Vector& x) { return kappa(*f, x); };
  for (const auto& c : cases) {
    EXPECT_NEAR(k(point(c.x, c.y)), c.kappa, 1e-13);
    const Vector d = fd_differential(k, *f, point(c.x, c.y));
    EXPECT_NEAR(d[0], c.dx, 1e-9);
    EXPECT_NEAR(d[1], c.dy, 1e-9);
  }
}

TEST(Calculus, FlatLaplacian) {
  auto plane = lagrangian_plane();
  const Vector p = point(0.1, -0.2);
  EXPECT_NEAR(laplace_beltrami([](const Vector& x) { return x.squaredNorm(); }, *plane, p), 4.0, 1e-8);
  EXPECT_EQ(laplace_beltrami([](const Vector&) { return 2.0; }, *plane, p), 0.0);
  EXPECT_LT(laplace_beltrami([](const Vector& x) { return -x.squaredNorm(); }, *plane, Vector::Zero(2)), 0.0);
}

TEST(Calculus, ConformalLaplacian) {
  // g = 1.25 δ, so Δ(x^2 + y^2) = 4 / 1.25
  EXPECT_NEAR(laplace_beltrami([](const Vector& x) { return x.squaredNorm(); }, *lambda_graph(0.5),
                               point(0.2, 0.3)),
              3.2, 1e-8);
}

TEST(Calculus, SphereLaplacianOfHeight) {
  // Δ cos θ = -2 cos θ / r^2 on the round sphere
  for (double r : {1.0, 2.0}) {
    auto s = sphere(r);
    const Vector p = point(1.0, 0.5);
    const auto h = [](const Vector& x) { return std::cos(x[0]); };
    const double expect = -2 * std::cos(1.0) / (r * r);
    const double e4 = std::abs(laplace_beltrami(h, *s, p, {1e-2, 4, false}) - expect);
    const double e2 = std::abs(laplace_beltrami(h, *s, p, {1e-2, 2, false}) - expect);
    EXPECT_LT(e4, 1e-7);
    EXPECT_LT(e4, e2 * 1e-2);
    EXPECT_LT(std::abs(laplace_beltrami(h, *s, p, {1e-2, 2, true}) - expect), e2 * 1e-2);
  }
}

TEST(Calculus, OrderTwoConvergesQuadratically) {
  auto s = sphere(1.0);
  const Vector p = point(1.2, 0.3);
  const auto h = [](const Vector& x) { return std::cos(x[0]); };
  const double expect = -2 * std::cos(1.2);
  const double e1 = std::abs(laplace_beltrami(h, *s, p, {2e-2, 2, false}) - expect);
  const double e2 = std::abs(laplace_beltrami(h, *s, p, {1e-2, 2, false}) - expect);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(Calculus, WeierstrassKappaLaplacianAgainstRichardson) {
  auto w = default_weierstrass();
  const Vector p = point(0.1, -0.15);
  ScalarField k = [&](const Vector& x) { return kappa(*w, x); };
  const double h = 1e-2;
  const double plain = laplace_beltrami(k, *w, p, {h, 4, false});
  const double extrapolated = laplace_beltrami(k, *w, p, {h, 4, true});
  EXPECT_LT(std::abs(plain - extrapolated), 10 * std::pow(h, 4));
}

TEST(Calculus, StencilLeavingTheDomainIsAnError) {
  auto plane = lagrangian_plane();
  EXPECT_THROW(laplace_beltrami([](const Vector& x) { return x[0]; }, *plane, point(0.99, 0.0)), DomainError);
  EXPECT_THROW(fd_differential([](const Vector& x) { return x[0]; }, *plane, point(0.0, 0.9999)), DomainError);
}

TEST(Calculus, ConstantFrameHasNoConnection) {
  auto plane = lagrangian_plane();
  const FrameConnection c = frame_connection_coeffs(
      *plane, [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); }, point(0.1, 0.1));
  for (const auto& k : c.real) EXPECT_EQ(k.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Calculus, RotatingFrame) {
  auto plane = lagrangian_plane();
  auto field = [](const Vector& x) {
    Matrix e(2, 2);
    e << std::cos(x[0]), -std::sin(x[0]), std::sin(x[0]), std::cos(x[0]);
    return e;
  };
  const FrameConnection c = frame_connection_coeffs(*plane, field, point(0.3, 0.0));
  EXPECT_NEAR(c.real[0](0, 1), 1.0, 1e-10);
  EXPECT_NEAR(c.real[0](1, 0), -1.0, 1e-10);
  EXPECT_NEAR(c.real[1].cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Calculus, ContinuedFrameAtBaseIsBaseFrame) {
  auto w = default_weierstrass();
  const Vector p = point(0.2, 0.1);
  const FrameField field(*w, p);
  EXPECT_LT((field.at(p) - field.base().real_frame).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Calculus, ContinuedFrameStaysAdapted) {
  auto prod = std::make_shared<ProductImmersion>(default_weierstrass(), lambda_family(0.5, 0.15, 0.1));
  Vector p0(4);
  p0 << 0.1, 0.2, -0.1, 0.2;
  const FrameField field(*prod, p0);
  Vector p = p0;
  p[0] += 0.01;
  p[3] -= 0.02;
  const Matrix e = field.at(p);
  const PulledBackForm form = pullback_form(*prod, p);
  EXPECT_LT((e.transpose() * form.g_m * e - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix d = e.transpose() * form.form * e;
  EXPECT_NEAR(d(0, 2), 0.0, 1e-12);
  EXPECT_NEAR(d(0, 3), 0.0, 1e-12);
  EXPECT_NEAR(d(1, 2), 0.0, 1e-12);
  EXPECT_GT(d(0, 1), 0.0);
  EXPECT_GT(d(2, 3), 0.0);
  // close to the base frame
  EXPECT_LT((e - field.base().real_frame).cwiseAbs().maxCoeff(), 0.1);
}

TEST(Calculus, FrameContinuationFailsAcrossRankChange) {
  // 1 - λ1 λ2 = -x changes sign across x = 0
  auto f = lambda_family(1.0, 0.5, 0.0);
  const FrameField field(*f, point(0.01, 0.0));
  EXPECT_NO_THROW(field.at(point(0.012, 0.0)));
  EXPECT_THROW(field.at(point(0.0, 0.0)), FrameContinuationError);
}

TEST(Calculus, FrameConnectionIsAntisymmetric) {
  auto w = default_weierstrass();
  const Vector p = point(-0.2, 0.15);
  const FrameField field(*w, p);
  const FrameConnection c = frame_connection_coeffs(*w, field, p);
  EXPECT_LT(c.antisymmetry_residual, 1e-6);
  // <∇_Z α, β> + <α, ∇_Z β> = 0 for the bilinear extension
  for (const auto& ca : c.complex_) EXPECT_LT((ca + ca.transpose()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Calculus, BilinearFrameNormalization) {
  const Matrix e = Matrix::Identity(4, 4);
  const CMatrix z = e.cast<Complex>() * complex_frame_coefficients(4);
  const CMatrix gram = z.transpose() * z;
  EXPECT_NEAR(gram(0, 2).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(gram(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(gram(0, 3)), 0.0, 1e-15);
}

TEST(Calculus, PullbackDerivativeVanishesWhenTotallyGeodesic) {
  const PointGeometry pg = point_geometry(*lambda_graph(0.3), point(0.1, 0.1));
  EXPECT_EQ(covariant_deriv_pullback_tensor(pg).max_abs(), 0.0);
}

TEST(Calculus, PullbackDerivativeTwoRoutes) {
  const std::vector<ImmersionPtr> cases = {default_weierstrass(), lambda_family(0.5, 0.15, 0.1),
                                           sphere(1.5)};
  for (const auto& f : cases) {
    const Vector p = f->id() == "sphere" ? point(1.0, 0.7) : point(0.15, -0.1);
    const PointGeometry pg = point_geometry(*f, p);
    const Tensor3 a = covariant_deriv_pullback_tensor(pg);
    const Tensor3 b = covariant_deriv_pullback_fd(*f, p);
    EXPECT_LT((a - b).max_abs(), 1e-8) << f->id();
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(a(k, i, j), -a(k, j, i), 1e-15);
  }
  Vector z(2), x(2), y(2);
  z << 1, 0.5;
  x << 0.2, 1;
  y << -1, 0.3;
  auto w = default_weierstrass();
  EXPECT_NEAR(covariant_deriv_pullback(*w, point(0.1, 0.1), z, x, y),
              -covariant_deriv_pullback(*w, point(0.1, 0.1), z, y, x), 1e-15);
}

TEST(Calculus, SphereIntrinsicCurvature) {
  for (double r : {1.0, 2.0}) {
    const Vector p = point(1.1, 0.4);
    const CurvatureTensor rm = intrinsic_curvature_fd(*sphere(r), p);
    Vector x(2), y(2);
    x << 1, 0;
    y << 0, 1;
    EXPECT_NEAR(rm.sectional(x, y, induced_metric(*sphere(r), p)), 1.0 / (r * r), 1e-7);
  }
}

TEST(Calculus, StratumCheck) {
  const StratumCheck a = check_stratum(*lambda_graph(0.5), point(0.1, 0.1), 0.04);
  EXPECT_TRUE(a.interior);
  EXPECT_EQ(a.rank, 1);
  const StratumCheck b = check_stratum(*lambda_family(1.0, 0.5, 0.0), point(0.01, 0.0), 0.04);
  EXPECT_FALSE(b.interior);
  EXPECT_FALSE(b.reason.empty());
  EXPECT_FALSE(check_stratum(*lambda_graph(0.0), point(0.0, 0.0), 0.04).interior);
  EXPECT_TRUE(check_stratum(*lagrangian_plane(), point(0.0, 0.0), 0.04).interior);
}

}  // namespace
}  // namespace kahler
