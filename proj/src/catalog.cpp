#include "kahler_lens/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "kahler_lens/angles.hpp"
#include "kahler_lens/identities.hpp"

namespace kahler {

nlohmann::json DeclaredProperties::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  auto put = [&](const char* name, const std::optional<bool>& v) {
    if (v) j[name] = *v;
  };
  put("minimal", minimal);
  put("totally_geodesic", totally_geodesic);
  put("lagrangian", lagrangian);
  put("complex", complex);
  put("pluriminimal", pluriminimal);
  put("constant_angles", constant_angles);
  return j;
}

namespace {

using Entry = std::pair<ImmersionPtr, DeclaredProperties>;

std::shared_ptr<const AmbientSpace> ambient(const std::string& id) {
  return std::make_shared<const AmbientSpace>(make_ambient(id));
}

Box square(double lo, double hi, int m = 2) { return {Vector::Constant(m, lo), Vector::Constant(m, hi)}; }

Polynomial poly(std::vector<Monomial> t) { return Polynomial(std::move(t)); }

ComplexPolynomial complex_data(const nlohmann::json& j) { return ComplexPolynomial::from_json(j, 1); }

double number(const nlohmann::json& params, const char* name) { return params.at(name).get<double>(); }

/// J' with J J' = -J' J, both orthogonal, coordinates (x1, y1, x2, y2).
Matrix second_structure() {
  Matrix jp = Matrix::Zero(4, 4);
  jp(2, 0) = 1.0;   // e_x1 -> e_x2
  jp(0, 2) = -1.0;  // e_x2 -> -e_x1
  jp(3, 1) = -1.0;  // e_y1 -> -e_y2
  jp(1, 3) = 1.0;   // e_y2 -> e_y1
  return jp;
}

/// Orthogonal L with L J = J_α L, J_α = cos α J + sin α J'.
Matrix rotated_basis(double alpha) {
  const Matrix j = make_ambient("flat:C2").complex_structure();
  const Matrix ja = std::cos(alpha) * j + std::sin(alpha) * second_structure();
  Matrix l(4, 4);
  const Vector u1 = Vector::Unit(4, 0);
  const Vector v1 = ja * u1;
  Vector u2 = Vector::Unit(4, 2);
  u2 -= u2.dot(u1) * u1 + u2.dot(v1) * v1;
  u2.normalize();
  l.col(0) = u1;
  l.col(1) = v1;
  l.col(2) = u2;
  l.col(3) = ja * u2;
  return l;
}

Matrix random_orthogonal(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) g(i, k) = n01(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i)
    if (r(i, i) < 0) q.col(i) *= -1.0;
  return q;
}

ImmersionPtr clifford_torus() {
  auto map = [](const Vector& p) {
    Vector q(4);
    q << std::cos(p[0]), std::sin(p[0]), std::cos(p[1]), std::sin(p[1]);
    return q;
  };
  auto jet = [map](const Vector& p) {
    Jet j;
    j.value = map(p);
    j.df = Matrix::Zero(4, 2);
    j.df(0, 0) = -std::sin(p[0]);
    j.df(1, 0) = std::cos(p[0]);
    j.df(2, 1) = -std::sin(p[1]);
    j.df(3, 1) = std::cos(p[1]);
    j.d2f = Tensor3(4, 2, 2);
    j.d2f(0, 0, 0) = -std::cos(p[0]);
    j.d2f(1, 0, 0) = -std::sin(p[0]);
    j.d2f(2, 1, 1) = -std::cos(p[1]);
    j.d2f(3, 1, 1) = -std::sin(p[1]);
    j.analytic = true;
    return j;
  };
  return std::make_shared<FunctionImmersion>(ambient("cp2:fs"), 2, square(0.1, 6.1), map, jet,
                                             "clifford-lagrangian-cp2");
}

Entry weierstrass_entry(const nlohmann::json& p, const std::string& id) {
  const double r = number(p, "radius");
  if (!(r > 0.0)) throw Error("weierstrass: radius must be positive");
  auto f = std::make_shared<WeierstrassImmersion>(complex_data(p.at("f1")), complex_data(p.at("f2")),
                                                  complex_data(p.at("g0")), square(-r, r), id);
  DeclaredProperties d;
  d.minimal = true;
  d.pluriminimal = true;
  return {f, d};
}

Entry generic_graph(const nlohmann::json& p) {
  const std::string amb = p.at("ambient").get<std::string>();
  const double r = number(p, "radius");
  auto space = ambient(amb);
  if (space->complex_dim() == 2) {
    std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                 poly({{0.3, {1, 0}}, {0.25, {2, 0}}, {0.1, {1, 1}}}),
                                 poly({{-0.2, {0, 1}}, {0.15, {0, 2}}, {-0.1, {1, 1}}})};
    return {std::make_shared<PolynomialImmersion>(space, c, square(-r, r), "generic-graph"), {}};
  }
  if (space->complex_dim() == 4) {
    std::vector<Polynomial> c;
    for (int i = 0; i < 4; ++i) {
      std::vector<int> e(4, 0);
      e[i] = 1;
      c.push_back(poly({{1.0, e}}));
    }
    c.push_back(poly({{0.3, {0, 1, 0, 0}}, {0.2, {2, 0, 0, 0}}, {0.1, {0, 0, 1, 1}}}));
    c.push_back(poly({{-0.25, {1, 0, 0, 0}}, {0.15, {0, 2, 0, 0}}, {-0.1, {1, 0, 1, 0}}}));
    c.push_back(poly({{0.2, {0, 0, 0, 1}}, {-0.1, {0, 0, 2, 0}}, {0.1, {0, 1, 0, 1}}}));
    c.push_back(poly({{-0.35, {0, 0, 1, 0}}, {0.05, {0, 0, 0, 2}}, {0.1, {1, 1, 0, 0}}}));
    return {std::make_shared<PolynomialImmersion>(space, c, square(-r, r, 4), "generic-graph"), {}};
  }
  throw Error("generic-graph: unsupported ambient " + amb);
}

std::vector<CatalogEntry> make_entries() {
  std::vector<CatalogEntry> e;

  e.push_back({"lagrangian-plane", "affine Lagrangian plane (x, 0, 0, y) in C^2", "flat:C2", {},
               [](const nlohmann::json&) -> Entry {
                 auto f = std::make_shared<PolynomialImmersion>(
                     ambient("flat:C2"),
                     std::vector<Polynomial>{poly({{1.0, {1, 0}}}), Polynomial(), Polynomial(),
                                             poly({{1.0, {0, 1}}})},
                     square(-1, 1), "lagrangian-plane");
                 DeclaredProperties d;
                 d.minimal = d.totally_geodesic = d.lagrangian = d.pluriminimal = d.constant_angles = true;
                 d.complex = false;
                 return {f, d};
               }});

  e.push_back({"complex-graph", "graph of a holomorphic function h in C^2", "flat:C2",
               {{"h", nlohmann::json::array({0.0, 0.0, 0.5, 0.2}), "coefficients of h(w)"}},
               [](const nlohmann::json& p) -> Entry {
                 auto f = std::make_shared<HolomorphicGraphImmersion>(
                     ambient("flat:C2"), std::vector<ComplexPolynomial>{complex_data(p.at("h"))},
                     Matrix::Identity(4, 4), square(-1, 1), "complex-graph");
                 DeclaredProperties d;
                 d.minimal = d.complex = d.pluriminimal = d.constant_angles = true;
                 d.lagrangian = false;
                 return {f, d};
               }});

  e.push_back({"lambda-graph", "(x, y, lambda x, -lambda y), cos = (1 - lambda^2)/(1 + lambda^2)", "flat:C2",
               {{"lambda", 0.5, "slope, >= 0"}},
               [](const nlohmann::json& p) -> Entry {
                 const double lam = number(p, "lambda");
                 if (!(lam >= 0.0)) throw Error("lambda-graph: lambda must be >= 0");
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                              lam != 0.0 ? poly({{lam, {1, 0}}}) : Polynomial(),
                                              lam != 0.0 ? poly({{-lam, {0, 1}}}) : Polynomial()};
                 auto f = std::make_shared<PolynomialImmersion>(ambient("flat:C2"), c, square(-1, 1),
                                                                "lambda-graph");
                 DeclaredProperties d;
                 d.minimal = d.totally_geodesic = d.pluriminimal = d.constant_angles = true;
                 d.lagrangian = lam == 1.0;
                 d.complex = lam == 0.0;
                 return {f, d};
               }});

  e.push_back({"lambda-graph-family",
               "(x, y, lambda x + a x^2, -lambda y - b y^2): non-minimal, nonconstant angle", "flat:C2",
               {{"lambda", 0.5, "slope"}, {"a", 0.15, "x^2 coefficient"}, {"b", 0.1, "y^2 coefficient"}},
               [](const nlohmann::json& p) -> Entry {
                 const double lam = number(p, "lambda"), a = number(p, "a"), b = number(p, "b");
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                              poly({{lam, {1, 0}}, {a, {2, 0}}}),
                                              poly({{-lam, {0, 1}}, {-b, {0, 2}}})};
                 return {std::make_shared<PolynomialImmersion>(ambient("flat:C2"), c, square(-0.5, 0.5),
                                                               "lambda-graph-family"),
                         {}};
               }});

  const nlohmann::json wf1 = nlohmann::json::array({1.0, 0.0, 0.5});
  const nlohmann::json wf2 = nlohmann::json::array({0.5, 0.3});
  const nlohmann::json wg0 = nlohmann::json::array({1.0, 0.2});
  e.push_back({"weierstrass", "minimal surface in R^4 from Weierstrass data (f1, f2, g0)", "flat:C2",
               {{"f1", wf1, "coefficients of f1"},
                {"f2", wf2, "coefficients of f2"},
                {"g0", wg0, "coefficients of g0"},
                {"radius", 0.5, "half-width of the square domain"}},
               [](const nlohmann::json& p) { return weierstrass_entry(p, "weierstrass"); }});

  e.push_back({"weierstrass-product", "product of two Weierstrass surfaces in C^4", "flat:C4",
               {{"first", {{"f1", wf1}, {"f2", wf2}, {"g0", wg0}, {"radius", 0.5}}, "Weierstrass data"},
                {"second",
                 {{"f1", nlohmann::json::array({0.3, 1.0})},
                  {"f2", nlohmann::json::array({-0.4, 0.0, 0.6})},
                  {"g0", nlohmann::json::array({1.0, -0.1})},
                  {"radius", 0.5}},
                 "Weierstrass data"}},
               [](const nlohmann::json& p) -> Entry {
                 auto a = weierstrass_entry(p.at("first"), "weierstrass").first;
                 auto b = weierstrass_entry(p.at("second"), "weierstrass").first;
                 DeclaredProperties d;
                 d.minimal = d.pluriminimal = true;
                 return {std::make_shared<ProductImmersion>(a, b), d};
               }});

  e.push_back({"rotated-j-curve",
               "graph of h, holomorphic for J_alpha = cos(alpha) J + sin(alpha) J'; constant cos = cos(alpha)",
               "flat:C2",
               {{"alpha", std::numbers::pi / 3.0, "rotation angle in [0, pi/2]"},
                {"h", nlohmann::json::array({0.0, 0.0, 0.3, 0.1}), "coefficients of h(w)"}},
               [](const nlohmann::json& p) -> Entry {
                 const double alpha = number(p, "alpha");
                 if (!(alpha >= 0.0 && alpha <= std::numbers::pi / 2.0))
                   throw Error("rotated-j-curve: alpha must lie in [0, pi/2]");
                 auto f = std::make_shared<HolomorphicGraphImmersion>(
                     ambient("flat:C2"), std::vector<ComplexPolynomial>{complex_data(p.at("h"))},
                     rotated_basis(alpha), square(-1, 1), "rotated-j-curve");
                 DeclaredProperties d;
                 d.minimal = d.pluriminimal = d.constant_angles = true;
                 return {f, d};
               }});

  e.push_back({"orthogonal-complex-surface",
               "complex surface for a random orthogonal complex structure Q J Q^T on R^8", "flat:C4",
               {{"seed", 7, "seed for Q"}},
               [](const nlohmann::json& p) -> Entry {
                 const Matrix q = random_orthogonal(8, p.at("seed").get<std::uint64_t>());
                 ComplexPolynomial h1(2, {{Complex(0.3, 0.1), {2, 0}}, {Complex(0.2, 0.0), {0, 1}},
                                          {Complex(0.0, 0.15), {1, 1}}});
                 ComplexPolynomial h2(2, {{Complex(-0.25, 0.0), {1, 0}}, {Complex(0.1, -0.2), {0, 2}},
                                          {Complex(0.05, 0.0), {2, 1}}});
                 auto f = std::make_shared<HolomorphicGraphImmersion>(
                     ambient("flat:C4"), std::vector<ComplexPolynomial>{h1, h2}, q, square(-0.5, 0.5, 4),
                     "orthogonal-complex-surface");
                 DeclaredProperties d;
                 d.minimal = true;
                 return {f, d};
               }});

  e.push_back({"product", "product of two catalog immersions (JSON descriptors)", "product",
               {{"first", {{"type", "catalog"}, {"id", "lambda-graph"}}, "immersion descriptor"},
                {"second", {{"type", "catalog"}, {"id", "lambda-graph"}, {"params", {{"lambda", 1.0}}}},
                 "immersion descriptor"}},
               [](const nlohmann::json& p) -> Entry {
                 return {std::make_shared<ProductImmersion>(immersion_from_json(p.at("first")),
                                                            immersion_from_json(p.at("second"))),
                         {}};
               }});

  e.push_back({"clifford-lagrangian-cp2", "Clifford torus |z1| = |z2| = 1 in the affine chart of CP^2",
               "cp2:fs", {},
               [](const nlohmann::json&) -> Entry {
                 DeclaredProperties d;
                 d.minimal = d.lagrangian = d.pluriminimal = d.constant_angles = true;
                 d.totally_geodesic = false;
                 return {clifford_torus(), d};
               }});

  e.push_back({"diagonal-disk", "diagonal z -> (z, z) in the bidisk", "diskxdisk",
               {{"radius", 0.6, "half-width of the square domain"}},
               [](const nlohmann::json& p) -> Entry {
                 const double r = number(p, "radius");
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                              poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}})};
                 DeclaredProperties d;
                 d.minimal = d.totally_geodesic = d.complex = d.pluriminimal = d.constant_angles = true;
                 return {std::make_shared<PolynomialImmersion>(ambient("diskxdisk"), c, square(-r, r),
                                                               "diagonal-disk"),
                         d};
               }});

  e.push_back({"antidiagonal-disk", "antidiagonal z -> (z, conj z) in the bidisk, Lagrangian", "diskxdisk",
               {{"radius", 0.6, "half-width of the square domain"}},
               [](const nlohmann::json& p) -> Entry {
                 const double r = number(p, "radius");
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                              poly({{1.0, {1, 0}}}), poly({{-1.0, {0, 1}}})};
                 DeclaredProperties d;
                 d.minimal = d.totally_geodesic = d.lagrangian = d.pluriminimal = d.constant_angles = true;
                 return {std::make_shared<PolynomialImmersion>(ambient("diskxdisk"), c, square(-r, r),
                                                               "antidiagonal-disk"),
                         d};
               }});

  e.push_back({"geodesic-product-disk", "product of real diameters (x, 0, y, 0) in the bidisk", "diskxdisk",
               {{"radius", 0.6, "half-width of the square domain"}},
               [](const nlohmann::json& p) -> Entry {
                 const double r = number(p, "radius");
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), Polynomial(), poly({{1.0, {0, 1}}}),
                                              Polynomial()};
                 DeclaredProperties d;
                 d.minimal = d.totally_geodesic = d.lagrangian = d.pluriminimal = d.constant_angles = true;
                 return {std::make_shared<PolynomialImmersion>(ambient("diskxdisk"), c, square(-r, r),
                                                               "geodesic-product-disk"),
                         d};
               }});

  e.push_back({"antiholomorphic-disk-graph",
               "graph (z, conj h(z)) in the bidisk: minimal, nonconstant angle, no complex directions",
               "diskxdisk", {{"h", nlohmann::json::array({0.0, 0.3, 0.2}), "coefficients of h(z)"}},
               [](const nlohmann::json& p) -> Entry {
                 const ComplexPolynomial h = complex_data(p.at("h"));
                 auto map = [h](const Vector& x) {
                   CVector w(1);
                   w[0] = Complex(x[0], x[1]);
                   const Complex v = h.value(w);
                   Vector q(4);
                   q << x[0], x[1], v.real(), -v.imag();
                   return q;
                 };
                 auto jet = [h, map](const Vector& x) {
                   CVector w(1);
                   w[0] = Complex(x[0], x[1]);
                   const Complex d1 = h.gradient(w)[0];
                   const Complex d2 = h.hessian(w)(0, 0);
                   Jet j;
                   j.value = map(x);
                   j.df = Matrix::Zero(4, 2);
                   j.df(0, 0) = 1.0;
                   j.df(1, 1) = 1.0;
                   const Complex dx = d1, dy = Complex(0, 1) * d1;
                   j.df(2, 0) = dx.real();
                   j.df(3, 0) = -dx.imag();
                   j.df(2, 1) = dy.real();
                   j.df(3, 1) = -dy.imag();
                   j.d2f = Tensor3(4, 2, 2);
                   const Complex sec[2][2] = {{d2, Complex(0, 1) * d2}, {Complex(0, 1) * d2, -d2}};
                   for (int a = 0; a < 2; ++a)
                     for (int b = 0; b < 2; ++b) {
                       j.d2f(2, a, b) = sec[a][b].real();
                       j.d2f(3, a, b) = -sec[a][b].imag();
                     }
                   j.analytic = true;
                   return j;
                 };
                 auto f = std::make_shared<FunctionImmersion>(ambient("diskxdisk"), 2, square(-0.5, 0.5), map,
                                                              jet, "antiholomorphic-disk-graph",
                                                              nlohmann::json{{"h", p.at("h")}});
                 DeclaredProperties d;
                 d.minimal = d.pluriminimal = true;
                 d.constant_angles = false;
                 return {f, d};
               }});

  e.push_back({"nonminimal-graph", "(x, y, x^2, 0): negative control, not minimal", "flat:C2", {},
               [](const nlohmann::json&) -> Entry {
                 std::vector<Polynomial> c = {poly({{1.0, {1, 0}}}), poly({{1.0, {0, 1}}}),
                                              poly({{1.0, {2, 0}}}), Polynomial()};
                 DeclaredProperties d;
                 d.minimal = false;
                 return {std::make_shared<PolynomialImmersion>(ambient("flat:C2"), c, square(-1, 1),
                                                               "nonminimal-graph"),
                         d};
               }});

  e.push_back({"generic-graph", "polynomial graph with no special structure", "cp2:fs | diskxdisk | flat:C2 | flat:C4",
               {{"ambient", "cp2:fs", "ambient id"}, {"radius", 0.4, "half-width of the cube domain"}},
               generic_graph});
  return e;
}

nlohmann::json merge_params(const CatalogEntry& entry, const nlohmann::json& params) {
  nlohmann::json merged = nlohmann::json::object();
  for (const auto& spec : entry.parameters) merged[spec.name] = spec.default_value;
  if (params.is_null()) return merged;
  if (!params.is_object()) throw Error(entry.id + ": parameters must be a JSON object");
  for (auto it = params.begin(); it != params.end(); ++it) {
    if (!merged.contains(it.key())) throw Error(entry.id + ": unknown parameter '" + it.key() + "'");
    merged[it.key()] = it.value();
  }
  return merged;
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = make_entries();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& id) {
  for (const auto& e : catalog_entries())
    if (e.id == id) return e;
  throw UnknownIdError("unknown catalog id '" + id + "'");
}

std::vector<Vector> certification_points(const Immersion& f) {
  const Box box = f.domain();
  const Vector center = 0.5 * (box.lower + box.upper);
  const Vector half = 0.5 * (box.upper - box.lower);
  std::vector<Vector> pts{center};
  for (int i = 0; i < center.size(); ++i)
    for (double s : {-0.3, 0.3}) {
      Vector p = center;
      p[i] += s * half[i];
      pts.push_back(p);
    }
  return pts;
}

Certification certify(const Immersion& f, const DeclaredProperties& declared,
                      const CertificationOptions& o) {
  Certification c;
  const auto points = certification_points(f);
  double h = 0.0, b = 0.0, lag = 0.0, cplx = 0.0, pluri = 0.0, spread = 0.0;
  std::vector<Vector> cos_at;
  for (const Vector& p : points) {
    h = std::max(h, minimality_residual(f, p));
    if (declared.totally_geodesic) b = std::max(b, second_fundamental_form_norm(f, p));
    const AngleSpectrum s = kahler_angles(f, p);
    cos_at.push_back(s.cosines);
    lag = std::max(lag, s.cosines.size() ? s.cosines.maxCoeff() : 0.0);
    cplx = std::max(cplx, s.cosines.size() ? 1.0 - s.cosines.minCoeff() : 0.0);
    if (declared.pluriminimal) pluri = std::max(pluri, pluriminimal_residual(f, p).residual);
  }
  for (int a = 0; a < cos_at[0].size(); ++a) {
    double lo = cos_at[0][a], hi = lo;
    for (const auto& v : cos_at) {
      lo = std::min(lo, v[a]);
      hi = std::max(hi, v[a]);
    }
    spread = std::max(spread, hi - lo);
  }
  auto check = [&](const char* name, const std::optional<bool>& want, double value, double tol) {
    if (!want) return;
    c.residuals[name] = value;
    const bool holds = value < tol;
    if (holds != *want) {
      c.ok = false;
      c.failed_properties.push_back(name);
      c.failures.push_back(std::string(name) + (*want ? " declared but residual " : " denied but residual ") +
                           format_double(value));
    }
  };
  check("minimal", declared.minimal, h, o.minimal_tol);
  check("totally_geodesic", declared.totally_geodesic, b, o.geodesic_tol);
  check("lagrangian", declared.lagrangian, lag, o.lagrangian_tol);
  check("complex", declared.complex, cplx, o.complex_tol);
  check("pluriminimal", declared.pluriminimal, std::max(pluri, h), o.pluriminimal_tol);
  check("constant_angles", declared.constant_angles, spread, o.constant_tol);
  return c;
}

BuiltImmersion build_entry(const std::string& id, const nlohmann::json& params) {
  const CatalogEntry& entry = catalog_entry(id);
  auto [f, declared] = entry.factory(merge_params(entry, params));
  BuiltImmersion out{f, declared, certify(*f, declared)};
  if (!out.certification.ok) {
    std::string msg = "certification of " + id + " failed:";
    for (const auto& s : out.certification.failures) msg += " " + s + ";";
    throw CertificationError(msg, out.certification.failed_properties.front());
  }
  return out;
}

ImmersionPtr build(const std::string& id, const nlohmann::json& params) {
  return build_entry(id, params).immersion;
}

ImmersionPtr immersion_from_json(const nlohmann::json& j) {
  if (j.is_string()) return build(j.get<std::string>());
  if (!j.is_object()) throw Error("immersion descriptor must be a string or an object");
  ImmersionPtr f;
  const std::string type = j.value("type", j.contains("id") ? "catalog" : "");
  if (type == "catalog") {
    f = build(j.at("id").get<std::string>(), j.value("params", nlohmann::json::object()));
  } else if (type == "polynomial") {
    f = PolynomialImmersion::from_json(j);
  } else if (type == "product") {
    const auto& fs = j.at("factors");
    if (!fs.is_array() || fs.size() != 2) throw Error("product descriptor needs two factors");
    f = std::make_shared<ProductImmersion>(immersion_from_json(fs[0]), immersion_from_json(fs[1]));
  } else {
    throw Error("unknown immersion descriptor type '" + type + "'");
  }
  if (j.contains("declared_einstein_constant"))
    f = with_declared_einstein_constant(f, j.at("declared_einstein_constant").get<double>());
  return f;
}

ImmersionPtr immersion_from_string(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '"'))
    return immersion_from_json(nlohmann::json::parse(s));
  if (std::ifstream in(s); in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return immersion_from_json(nlohmann::json::parse(buf.str()));
  }
  return build(s);
}

nlohmann::json describe_entry(const std::string& id) {
  const CatalogEntry& entry = catalog_entry(id);
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : entry.parameters)
    params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
  const BuiltImmersion b = build_entry(id);
  const Box box = b.immersion->domain();
  auto to_std = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"id", entry.id},
          {"description", entry.description},
          {"ambient", entry.ambient},
          {"parameters", params},
          {"declared", b.declared.to_json()},
          {"certification", b.certification.residuals},
          {"domain", {{"lower", to_std(box.lower)}, {"upper", to_std(box.upper)}}}};
}

}  // namespace kahler
