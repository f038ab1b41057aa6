#include "kahler_lens/immersion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kahler_lens/finite_difference.hpp"

namespace kahler {

namespace {

std::string format_point(const Vector& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p[i]);
    os << (i ? ", " : "") << buf;
  }
  os << ")";
  return os.str();
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

nlohmann::json box_to_json(const Box& b) {
  return {{"lower", std::vector<double>(b.lower.data(), b.lower.data() + b.lower.size())},
          {"upper", std::vector<double>(b.upper.data(), b.upper.data() + b.upper.size())}};
}

Box box_from_json(const nlohmann::json& j) {
  const auto lo = j.at("lower").get<std::vector<double>>();
  const auto hi = j.at("upper").get<std::vector<double>>();
  if (lo.size() != hi.size()) throw DimensionError("domain bounds differ in length");
  Box b{Vector(lo.size()), Vector(hi.size())};
  for (std::size_t i = 0; i < lo.size(); ++i) {
    b.lower[i] = lo[i];
    b.upper[i] = hi[i];
  }
  return b;
}

Complex ipow_int(Complex z, int k) {
  Complex r(1.0, 0.0);
  for (int i = 0; i < k; ++i) r *= z;
  return r;
}

// i^k for k in {0, 1, 2}
Complex ipow(int k) {
  static const Complex table[3] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0)};
  return table[k];
}

}  // namespace

// Immersion --------------------------------------------------------------------

Immersion::Immersion(std::shared_ptr<const AmbientSpace> ambient) : ambient_(std::move(ambient)) {
  if (!ambient_) throw Error("immersion without ambient space");
}

void Immersion::check_dimensions() const {
  const int m = domain_dim();
  if (m < 2 || m % 2 != 0)
    throw DimensionError("domain dimension must be even and positive, got " + std::to_string(m));
  if (ambient_->real_dim() != 2 * m)
    throw DimensionError("immersion of dimension " + std::to_string(m) + " into " +
                         ambient_->id() + " of real dimension " +
                         std::to_string(ambient_->real_dim()) + "; need twice the domain dimension");
  if (domain().dim() != m) throw DimensionError("domain box dimension mismatch");
}

nlohmann::json Immersion::descriptor() const {
  return {{"id", id()}, {"ambient", ambient_->descriptor()}, {"domain", box_to_json(domain())}};
}

bool Immersion::admissible(const Vector& p, double margin) const {
  if (p.size() != domain_dim() || !domain().contains(p, margin)) return false;
  return ambient_->admissible(map(p));
}

void Immersion::require_admissible(const Vector& p) const {
  if (p.size() != domain_dim())
    throw DimensionError("point of dimension " + std::to_string(p.size()) + " for " + id());
  if (!domain().contains(p))
    throw DomainError("point " + format_point(p) + " outside the domain of " + id());
  ambient_->require_admissible(map(p));
}

Jet Immersion::fd_jet(const Vector& p) const {
  const int m = domain_dim();
  const int n = ambient_->real_dim();
  const double h1 = fd::first_derivative_step();
  const double h2 = fd::second_derivative_step();
  auto f = [this](const Vector& x) { return map(x); };
  Jet jet;
  jet.value = map(p);
  jet.df.resize(n, m);
  jet.d2f = Tensor3(n, m, m);
  for (int a = 0; a < m; ++a) jet.df.col(a) = fd::partial(f, p, a, h1);
  for (int a = 0; a < m; ++a) {
    const Vector daa = fd::second_partial(f, p, a, h2);
    for (int l = 0; l < n; ++l) jet.d2f(l, a, a) = daa[l];
    for (int b = a + 1; b < m; ++b) {
      const Vector dab = fd::partial(
          [&](const Vector& x) -> Vector { return fd::partial(f, x, b, h2); }, p, a, h2);
      for (int l = 0; l < n; ++l) {
        jet.d2f(l, a, b) = dab[l];
        jet.d2f(l, b, a) = dab[l];
      }
    }
  }
  jet.analytic = false;
  return jet;
}

// Polynomials ------------------------------------------------------------------

double parse_rational(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw Error("coefficient must be a number or a \"p/q\" string");
  const std::string s = j.get<std::string>();
  const auto slash = s.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    const double p = std::stod(num, &used);
    if (used != num.size()) throw std::invalid_argument(s);
    const double q = std::stod(den, &used);
    if (used != den.size()) throw std::invalid_argument(s);
    if (q == 0.0) throw Error("zero denominator in coefficient '" + s + "'");
    return p / q;
  } catch (const std::invalid_argument&) {
    throw Error("cannot parse coefficient '" + s + "'");
  }
}

double Polynomial::value(const Vector& x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (std::size_t i = 0; i < t.powers.size(); ++i) v *= std::pow(x[i], t.powers[i]);
    s += v;
  }
  return s;
}

Vector Polynomial::gradient(const Vector& x) const {
  Vector g = Vector::Zero(x.size());
  for (const auto& t : terms_) {
    for (std::size_t k = 0; k < t.powers.size(); ++k) {
      if (t.powers[k] == 0) continue;
      double v = t.coef * t.powers[k];
      for (std::size_t i = 0; i < t.powers.size(); ++i)
        v *= std::pow(x[i], t.powers[i] - (i == k ? 1 : 0));
      g[k] += v;
    }
  }
  return g;
}

Matrix Polynomial::hessian(const Vector& x) const {
  const int n = static_cast<int>(x.size());
  Matrix h = Matrix::Zero(n, n);
  for (const auto& t : terms_) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::vector<int> pw = t.powers;
        double v = t.coef;
        v *= pw[a];
        pw[a] -= 1;
        if (v == 0.0) continue;
        v *= pw[b];
        pw[b] -= 1;
        if (v == 0.0) continue;
        for (int i = 0; i < n; ++i) v *= std::pow(x[i], pw[i]);
        h(a, b) += v;
      }
  }
  return h;
}

Polynomial Polynomial::from_json(const nlohmann::json& j, int vars) {
  std::vector<Monomial> terms;
  for (const auto& t : j) {
    Monomial mono;
    if (t.is_array() && t.size() == 2) {
      mono.coef = parse_rational(t[0]);
      mono.powers = t[1].get<std::vector<int>>();
    } else {
      mono.coef = parse_rational(t.at("coef"));
      mono.powers = t.at("powers").get<std::vector<int>>();
    }
    if (static_cast<int>(mono.powers.size()) != vars)
      throw DimensionError("monomial has " + std::to_string(mono.powers.size()) +
                           " exponents, expected " + std::to_string(vars));
    if (std::any_of(mono.powers.begin(), mono.powers.end(), [](int e) { return e < 0; }))
      throw Error("negative exponent in polynomial");
    terms.push_back(std::move(mono));
  }
  return Polynomial(std::move(terms));
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms_) out.push_back({{"coef", t.coef}, {"powers", t.powers}});
  return out;
}

PolynomialImmersion::PolynomialImmersion(std::shared_ptr<const AmbientSpace> ambient,
                                         std::vector<Polynomial> components, Box domain,
                                         std::string id)
    : Immersion(std::move(ambient)),
      components_(std::move(components)),
      domain_(std::move(domain)),
      id_(std::move(id)) {
  check_dimensions();
  if (static_cast<int>(components_.size()) != this->ambient().real_dim())
    throw DimensionError("polynomial immersion needs one component per ambient coordinate");
}

Vector PolynomialImmersion::map(const Vector& p) const {
  Vector q(components_.size());
  for (std::size_t l = 0; l < components_.size(); ++l) q[l] = components_[l].value(p);
  return q;
}

Jet PolynomialImmersion::jet(const Vector& p) const {
  const int n = static_cast<int>(components_.size());
  const int m = domain_dim();
  Jet jet;
  jet.value = map(p);
  jet.df.resize(n, m);
  jet.d2f = Tensor3(n, m, m);
  for (int l = 0; l < n; ++l) {
    jet.df.row(l) = components_[l].gradient(p).transpose();
    const Matrix h = components_[l].hessian(p);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) jet.d2f(l, a, b) = h(a, b);
  }
  jet.analytic = true;
  return jet;
}

nlohmann::json PolynomialImmersion::descriptor() const {
  nlohmann::json j = Immersion::descriptor();
  j["type"] = "polynomial";
  j["components"] = nlohmann::json::array();
  for (const auto& c : components_) j["components"].push_back(c.to_json());
  return j;
}

std::shared_ptr<PolynomialImmersion> PolynomialImmersion::from_json(const nlohmann::json& j) {
  auto ambient = std::make_shared<const AmbientSpace>(ambient_from_json(j.value("ambient", nlohmann::json("flat:C2"))));
  const int m = ambient->real_dim() / 2;
  Box domain{Vector::Constant(m, -1.0), Vector::Constant(m, 1.0)};
  if (j.contains("domain")) domain = box_from_json(j.at("domain"));
  std::vector<Polynomial> comps;
  for (const auto& c : j.at("components")) comps.push_back(Polynomial::from_json(c, m));
  return std::make_shared<PolynomialImmersion>(ambient, std::move(comps), domain,
                                               j.value("id", std::string("polynomial")));
}

// Complex polynomials ------------------------------------------------------------

ComplexPolynomial::ComplexPolynomial(int vars, std::vector<ComplexMonomial> terms)
    : vars_(vars), terms_(std::move(terms)) {
  for (const auto& t : terms_)
    if (static_cast<int>(t.powers.size()) != vars_)
      throw DimensionError("complex monomial exponent count mismatch");
}

ComplexPolynomial ComplexPolynomial::univariate(const std::vector<Complex>& coefficients) {
  std::vector<ComplexMonomial> terms;
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    if (coefficients[k] != 0.0) terms.push_back({coefficients[k], {static_cast<int>(k)}});
  return ComplexPolynomial(1, std::move(terms));
}

Complex ComplexPolynomial::value(const CVector& w) const {
  Complex s = 0.0;
  for (const auto& t : terms_) {
    Complex v = t.coef;
    for (int i = 0; i < vars_; ++i) v *= ipow_int(w[i], t.powers[i]);
    s += v;
  }
  return s;
}

CVector ComplexPolynomial::gradient(const CVector& w) const {
  CVector g = CVector::Zero(vars_);
  for (const auto& t : terms_)
    for (int k = 0; k < vars_; ++k) {
      if (t.powers[k] == 0) continue;
      Complex v = t.coef * static_cast<double>(t.powers[k]);
      for (int i = 0; i < vars_; ++i) v *= ipow_int(w[i], t.powers[i] - (i == k ? 1 : 0));
      g[k] += v;
    }
  return g;
}

CMatrix ComplexPolynomial::hessian(const CVector& w) const {
  CMatrix h = CMatrix::Zero(vars_, vars_);
  for (const auto& t : terms_)
    for (int a = 0; a < vars_; ++a)
      for (int b = 0; b < vars_; ++b) {
        std::vector<int> pw = t.powers;
        Complex v = t.coef * static_cast<double>(pw[a]);
        pw[a] -= 1;
        if (v == 0.0) continue;
        v *= static_cast<double>(pw[b]);
        pw[b] -= 1;
        if (v == 0.0) continue;
        for (int i = 0; i < vars_; ++i) v *= ipow_int(w[i], pw[i]);
        h(a, b) += v;
      }
  return h;
}

namespace {

Complex complex_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 2) return {parse_rational(j[0]), parse_rational(j[1])};
  return {parse_rational(j), 0.0};
}

}  // namespace

ComplexPolynomial ComplexPolynomial::from_json(const nlohmann::json& j, int vars) {
  if (!j.is_array()) throw Error("complex polynomial must be an array");
  const bool coefficient_list =
      vars == 1 && std::none_of(j.begin(), j.end(), [](const auto& t) { return t.is_object(); });
  if (coefficient_list) {
    std::vector<Complex> cs;
    for (const auto& c : j) cs.push_back(complex_from_json(c));
    return univariate(cs);
  }
  std::vector<ComplexMonomial> terms;
  for (const auto& t : j) {
    ComplexMonomial mono;
    mono.coef = {t.contains("re") ? parse_rational(t.at("re")) : 0.0,
                 t.contains("im") ? parse_rational(t.at("im")) : 0.0};
    mono.powers = t.at("powers").get<std::vector<int>>();
    terms.push_back(std::move(mono));
  }
  return ComplexPolynomial(vars, std::move(terms));
}

nlohmann::json ComplexPolynomial::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : terms_)
    out.push_back({{"re", t.coef.real()}, {"im", t.coef.imag()}, {"powers", t.powers}});
  return out;
}

// Holomorphic graphs -----------------------------------------------------------

HolomorphicGraphImmersion::HolomorphicGraphImmersion(std::shared_ptr<const AmbientSpace> ambient,
                                                     std::vector<ComplexPolynomial> graph,
                                                     Matrix linear, Box domain, std::string id)
    : Immersion(std::move(ambient)),
      graph_(std::move(graph)),
      linear_(std::move(linear)),
      domain_(std::move(domain)),
      id_(std::move(id)) {
  check_dimensions();
  const int n = static_cast<int>(graph_.size());
  for (const auto& h : graph_)
    if (h.vars() != n) throw DimensionError("graph functions must take n complex variables");
  if (linear_.rows() != 4 * n || linear_.cols() != 4 * n)
    throw DimensionError("linear map must be square of the ambient dimension");
}

Vector HolomorphicGraphImmersion::map(const Vector& p) const {
  const int n = static_cast<int>(graph_.size());
  const CVector w = complexify(p);
  CVector full(2 * n);
  full.head(n) = w;
  for (int j = 0; j < n; ++j) full[n + j] = graph_[j].value(w);
  return linear_ * realify(full);
}

Jet HolomorphicGraphImmersion::jet(const Vector& p) const {
  const int n = static_cast<int>(graph_.size());
  const int m = 2 * n;
  const int big = 4 * n;
  const CVector w = complexify(p);
  CMatrix d = CMatrix::Zero(2 * n, n);  // complex derivative of (w, h(w)) in w_k
  std::vector<CMatrix> hess;
  for (int k = 0; k < n; ++k) d(k, k) = 1.0;
  for (int j = 0; j < n; ++j) {
    d.row(n + j) = graph_[j].gradient(w).transpose();
    hess.push_back(graph_[j].hessian(w));
  }
  Jet jet;
  jet.value = map(p);
  jet.df.resize(big, m);
  jet.d2f = Tensor3(big, m, m);
  for (int a = 0; a < m; ++a) jet.df.col(a) = linear_ * realify(ipow(a % 2) * d.col(a / 2));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      CVector hv = CVector::Zero(2 * n);
      for (int j = 0; j < n; ++j) hv[n + j] = hess[j](a / 2, b / 2);
      const Vector col = linear_ * realify(ipow(a % 2 + b % 2) * hv);
      for (int l = 0; l < big; ++l) jet.d2f(l, a, b) = col[l];
    }
  jet.analytic = true;
  return jet;
}

nlohmann::json HolomorphicGraphImmersion::descriptor() const {
  nlohmann::json j = Immersion::descriptor();
  j["type"] = "holomorphic-graph";
  j["graph"] = nlohmann::json::array();
  for (const auto& h : graph_) j["graph"].push_back(h.to_json());
  return j;
}

// Weierstrass ------------------------------------------------------------------

WeierstrassImmersion::WeierstrassImmersion(ComplexPolynomial f1, ComplexPolynomial f2,
                                           ComplexPolynomial g0, Box domain, std::string id)
    : Immersion(std::make_shared<const AmbientSpace>(make_ambient("flat:C2"))),
      f1_(std::move(f1)),
      f2_(std::move(f2)),
      g0_(std::move(g0)),
      domain_(std::move(domain)),
      id_(std::move(id)) {
  check_dimensions();
  if (f1_.vars() != 1 || f2_.vars() != 1 || g0_.vars() != 1)
    throw DimensionError("Weierstrass data must be functions of one complex variable");
}

CVector WeierstrassImmersion::phi(Complex z) const {
  const CVector w = CVector::Constant(1, z);
  const Complex a = f1_.value(w), b = f2_.value(w), g = g0_.value(w);
  CVector out(4);
  out << (1.0 + a * b) * g / 2.0, kI * (1.0 - a * b) * g / 2.0, (a - b) * g / 2.0,
      kI * (a + b) * g / 2.0;
  return out;
}

CVector WeierstrassImmersion::phi_prime(Complex z) const {
  const CVector w = CVector::Constant(1, z);
  const Complex a = f1_.value(w), b = f2_.value(w), g = g0_.value(w);
  const Complex da = f1_.gradient(w)[0], db = f2_.gradient(w)[0], dg = g0_.gradient(w)[0];
  const Complex ab = a * b, dab = da * b + a * db;
  CVector out(4);
  out << (dg * (1.0 + ab) + g * dab) / 2.0, kI * (dg * (1.0 - ab) - g * dab) / 2.0,
      (dg * (a - b) + g * (da - db)) / 2.0, kI * (dg * (a + b) + g * (da + db)) / 2.0;
  return out;
}

CVector WeierstrassImmersion::integral(Complex z) const {
  using boost::math::quadrature::gauss_kronrod;
  constexpr double tol = 1e-12;
  CVector out = CVector::Zero(4);
  const double x = z.real(), y = z.imag();
  for (int k = 0; k < 4; ++k) {
    for (int part = 0; part < 2; ++part) {
      auto take = [part](Complex c) { return part == 0 ? c.real() : c.imag(); };
      double v = 0.0;
      if (x != 0.0)
        v += gauss_kronrod<double, 15>::integrate(
            [&](double t) { return take(phi(Complex(t, 0.0))[k]); }, 0.0, x, 15, tol);
      if (y != 0.0)
        v += gauss_kronrod<double, 15>::integrate(
            [&](double s) { return take(kI * phi(Complex(x, s))[k]); }, 0.0, y, 15, tol);
      out[k] += part == 0 ? Complex(v, 0.0) : Complex(0.0, v);
    }
  }
  return out;
}

Vector WeierstrassImmersion::map(const Vector& p) const {
  return integral(Complex(p[0], p[1])).real();
}

Jet WeierstrassImmersion::jet(const Vector& p) const {
  const Complex z(p[0], p[1]);
  const CVector ph = phi(z), dph = phi_prime(z);
  Jet jet;
  jet.value = map(p);
  jet.df.resize(4, 2);
  jet.df.col(0) = ph.real();
  jet.df.col(1) = -ph.imag();
  jet.d2f = Tensor3(4, 2, 2);
  for (int l = 0; l < 4; ++l) {
    jet.d2f(l, 0, 0) = dph[l].real();
    jet.d2f(l, 0, 1) = -dph[l].imag();
    jet.d2f(l, 1, 0) = -dph[l].imag();
    jet.d2f(l, 1, 1) = -dph[l].real();
  }
  jet.analytic = true;
  return jet;
}

nlohmann::json WeierstrassImmersion::descriptor() const {
  nlohmann::json j = Immersion::descriptor();
  j["type"] = "weierstrass";
  j["f1"] = f1_.to_json();
  j["f2"] = f2_.to_json();
  j["g0"] = g0_.to_json();
  return j;
}

// Products ---------------------------------------------------------------------

ProductImmersion::ProductImmersion(ImmersionPtr first, ImmersionPtr second)
    : Immersion(std::make_shared<const AmbientSpace>(product(first->ambient(), second->ambient()))),
      first_(std::move(first)),
      second_(std::move(second)) {
  check_dimensions();
}

std::string ProductImmersion::id() const { return first_->id() + "x" + second_->id(); }

int ProductImmersion::domain_dim() const { return first_->domain_dim() + second_->domain_dim(); }

Box ProductImmersion::domain() const {
  const Box a = first_->domain(), b = second_->domain();
  Box out{Vector(a.dim() + b.dim()), Vector(a.dim() + b.dim())};
  out.lower << a.lower, b.lower;
  out.upper << a.upper, b.upper;
  return out;
}

Vector ProductImmersion::map(const Vector& p) const {
  const int m1 = first_->domain_dim();
  const Vector a = first_->map(p.head(m1));
  const Vector b = second_->map(p.tail(p.size() - m1));
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

bool ProductImmersion::has_analytic_jet() const {
  return first_->has_analytic_jet() && second_->has_analytic_jet();
}

Jet ProductImmersion::jet(const Vector& p) const {
  const int m1 = first_->domain_dim(), m2 = second_->domain_dim();
  const Jet a = first_->jet(p.head(m1));
  const Jet b = second_->jet(p.tail(m2));
  const int n1 = static_cast<int>(a.value.size()), n2 = static_cast<int>(b.value.size());
  Jet out;
  out.value.resize(n1 + n2);
  out.value << a.value, b.value;
  out.df = Matrix::Zero(n1 + n2, m1 + m2);
  out.df.topLeftCorner(n1, m1) = a.df;
  out.df.bottomRightCorner(n2, m2) = b.df;
  out.d2f = Tensor3(n1 + n2, m1 + m2, m1 + m2);
  for (int l = 0; l < n1; ++l)
    for (int i = 0; i < m1; ++i)
      for (int k = 0; k < m1; ++k) out.d2f(l, i, k) = a.d2f(l, i, k);
  for (int l = 0; l < n2; ++l)
    for (int i = 0; i < m2; ++i)
      for (int k = 0; k < m2; ++k) out.d2f(n1 + l, m1 + i, m1 + k) = b.d2f(l, i, k);
  out.analytic = a.analytic && b.analytic;
  return out;
}

nlohmann::json ProductImmersion::descriptor() const {
  nlohmann::json j = Immersion::descriptor();
  j["type"] = "product";
  j["factors"] = {first_->descriptor(), second_->descriptor()};
  return j;
}

// Closed forms and views -------------------------------------------------------

FunctionImmersion::FunctionImmersion(std::shared_ptr<const AmbientSpace> ambient, int domain_dim,
                                     Box domain, MapFn map, JetFn jet, std::string id,
                                     nlohmann::json params)
    : Immersion(std::move(ambient)),
      dim_(domain_dim),
      domain_(std::move(domain)),
      map_(std::move(map)),
      jet_(std::move(jet)),
      id_(std::move(id)),
      params_(std::move(params)) {
  check_dimensions();
}

Jet FunctionImmersion::jet(const Vector& p) const {
  if (!jet_) return fd_jet(p);
  Jet j = jet_(p);
  j.analytic = true;
  return j;
}

nlohmann::json FunctionImmersion::descriptor() const {
  nlohmann::json j = Immersion::descriptor();
  if (!params_.is_null()) j["params"] = params_;
  return j;
}

ImmersionView::ImmersionView(ImmersionPtr inner, std::shared_ptr<const AmbientSpace> ambient,
                             bool force_fd)
    : Immersion(ambient ? std::move(ambient) : inner->ambient_ptr()),
      inner_(std::move(inner)),
      force_fd_(force_fd) {
  check_dimensions();
}

Jet ImmersionView::jet(const Vector& p) const {
  return force_fd_ ? fd_jet(p) : inner_->jet(p);
}

nlohmann::json ImmersionView::descriptor() const {
  nlohmann::json j = inner_->descriptor();
  j["ambient"] = ambient().descriptor();
  if (force_fd_) j["jets"] = "finite-difference";
  return j;
}

ImmersionPtr with_fd_jets(ImmersionPtr f) {
  return std::make_shared<ImmersionView>(std::move(f), nullptr, true);
}

ImmersionPtr with_declared_einstein_constant(ImmersionPtr f, double r) {
  auto ambient =
      std::make_shared<const AmbientSpace>(f->ambient().with_declared_einstein_constant(r));
  return std::make_shared<ImmersionView>(std::move(f), std::move(ambient), false);
}

// Pointwise geometry -------------------------------------------------------------

CVector PointGeometry::sff_apply(const CVector& x, const CVector& y) const {
  const int n = ambient_dim(), mm = m();
  CVector out = CVector::Zero(n);
  for (int a = 0; a < mm; ++a) {
    if (x[a] == 0.0) continue;
    for (int b = 0; b < mm; ++b) {
      const Complex w = x[a] * y[b];
      if (w == 0.0) continue;
      for (int l = 0; l < n; ++l) out[l] += w * sff(l, a, b);
    }
  }
  return out;
}

Vector PointGeometry::mean_curvature() const {
  const int n = ambient_dim(), mm = m();
  Vector h = Vector::Zero(n);
  for (int a = 0; a < mm; ++a)
    for (int b = 0; b < mm; ++b)
      for (int l = 0; l < n; ++l) h[l] += g_m_inv(a, b) * sff(l, a, b);
  return h;
}

PointGeometry point_geometry(const Immersion& f, const Vector& p, double rank_tol) {
  const AmbientSpace& amb = f.ambient();
  if (p.size() != f.domain_dim())
    throw DimensionError("point of dimension " + std::to_string(p.size()) + " for " + f.id());
  if (!f.domain().contains(p))
    throw DomainError("point " + format_point(p) + " outside the domain of " + f.id());

  PointGeometry pg;
  pg.p = p;
  pg.jet = f.jet(p);
  const Vector& q = pg.jet.value;
  amb.require_admissible(q);

  const int n = amb.real_dim();
  const int m = f.domain_dim();
  const Matrix& df = pg.jet.df;
  pg.g = amb.metric(q);
  pg.j = amb.complex_structure(q);
  pg.gamma_n = amb.christoffel_unchecked(q);

  // Rank test in orthonormal gauges.
  const Eigen::LLT<Matrix> lg(pg.g);
  const Matrix gauge_df = lg.matrixU() * df;
  const Eigen::JacobiSVD<Matrix> svd(gauge_df);
  const Vector sv = svd.singularValues();
  const double smax = sv[0], smin = sv[sv.size() - 1];
  if (!(smin > rank_tol * smax)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "dF is rank deficient at %s: smallest singular value %.3g (largest %.3g)",
                  format_point(p).c_str(), smin, smax);
    throw DegenerateImmersionError(buf, smin);
  }

  pg.g_m = df.transpose() * pg.g * df;
  pg.g_m = 0.5 * (pg.g_m + pg.g_m.transpose());
  pg.g_m_inv = pg.g_m.inverse();

  // ∂_c g_M(a, b)
  const Tensor3 dg = amb.metric_derivative(q);
  std::vector<Matrix> dgm(m, Matrix::Zero(m, m));
  std::vector<Matrix> d2(m, Matrix(n, m));  // d2[c].col(a) = ∂_c ∂_a F
  for (int c = 0; c < m; ++c)
    for (int a = 0; a < m; ++a)
      for (int l = 0; l < n; ++l) d2[c](l, a) = pg.jet.d2f(l, a, c);
  for (int c = 0; c < m; ++c) {
    Matrix dgc = Matrix::Zero(n, n);
    for (int l = 0; l < n; ++l) {
      if (df(l, c) == 0.0) continue;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dgc(a, b) += df(l, c) * dg(l, a, b);
    }
    dgm[c] = d2[c].transpose() * pg.g * df + df.transpose() * pg.g * d2[c] +
             df.transpose() * dgc * df;
  }
  pg.gamma_m = Tensor3(m, m, m);
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        double s = 0.0;
        for (int r = 0; r < m; ++r)
          s += pg.g_m_inv(l, r) * (dgm[i](r, k) + dgm[k](r, i) - dgm[r](i, k));
        pg.gamma_m(l, i, k) = 0.5 * s;
      }

  pg.projection = Matrix::Identity(n, n) - df * pg.g_m_inv * df.transpose() * pg.g;

  pg.sff = Tensor3(n, m, m);
  double scale = 1.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vector v(n);
      for (int l = 0; l < n; ++l) {
        double s = pg.jet.d2f(l, a, b);
        for (int i = 0; i < n; ++i) {
          if (df(i, a) == 0.0) continue;
          for (int k = 0; k < n; ++k) s += pg.gamma_n(l, i, k) * df(i, a) * df(k, b);
        }
        v[l] = s;
      }
      scale = std::max(scale, std::sqrt(v.dot(pg.g * v)));
      const Vector pv = pg.projection * v;
      for (int l = 0; l < n; ++l) pg.sff(l, a, b) = pv[l];
    }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vector v(n);
      for (int l = 0; l < n; ++l) v[l] = pg.sff(l, a, b);
      const Vector t = df.transpose() * pg.g * v;
      for (int c = 0; c < m; ++c)
        pg.normality_residual = std::max(
            pg.normality_residual, std::abs(t[c]) / (scale * std::sqrt(pg.g_m(c, c))));
    }
  return pg;
}

Matrix induced_metric(const Immersion& f, const Vector& p) { return point_geometry(f, p).g_m; }

SecondFundamentalForm second_fundamental_form(const Immersion& f, const Vector& p) {
  const PointGeometry pg = point_geometry(f, p);
  const int n = pg.ambient_dim(), m = pg.m();
  SecondFundamentalForm out;
  out.values = Tensor3(m, m, n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int l = 0; l < n; ++l) {
        out.values(a, b, l) = pg.sff(l, a, b);
        out.symmetry_residual =
            std::max(out.symmetry_residual, std::abs(pg.sff(l, a, b) - pg.sff(l, b, a)));
      }
  out.normality_residual = pg.normality_residual;
  return out;
}

double minimality_residual(const Immersion& f, const Vector& p) {
  const PointGeometry pg = point_geometry(f, p);
  const Vector h = pg.mean_curvature();
  return std::sqrt(std::max(0.0, h.dot(pg.g * h)));
}

Vector normal_projection(const Immersion& f, const Vector& p, const Vector& v) {
  return point_geometry(f, p).projection * v;
}

Tensor3 induced_christoffel(const Immersion& f, const Vector& p) {
  return point_geometry(f, p).gamma_m;
}

}  // namespace kahler
