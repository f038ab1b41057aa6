#include "kahler_lens/identities.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kahler_lens/finite_difference.hpp"

namespace kahler {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Skipped:
      return "skipped";
  }
  return "skipped";
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

nlohmann::json IdentityReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["id"] = id;
  j["point"] = numbers(std::vector<double>(point.data(), point.data() + point.size()));
  j["lhs"] = numbers(lhs);
  j["rhs"] = numbers(rhs);
  j["residual"] = number(residual);
  j["absolute_residual"] = number(absolute_residual);
  j["relative_residual"] = number(relative_residual);
  j["measure"] = relative ? "relative" : "absolute";
  j["tolerance"] = number(tolerance);
  j["verdict"] = to_string(verdict);
  if (verdict == Verdict::Skipped) j["skip_reason"] = skip_reason;
  j["details"] = details;
  return j;
}

std::string IdentityReport::csv_header() {
  return "schema_version,id,point,lhs,rhs,residual,absolute_residual,relative_residual,measure,"
         "tolerance,verdict,skip_reason";
}

std::string IdentityReport::to_csv() const {
  std::string s = std::to_string(kReportSchemaVersion) + "," + id + ",";
  s += join(std::vector<double>(point.data(), point.data() + point.size())) + ",";
  s += join(lhs) + "," + join(rhs) + ",";
  s += format_double(residual) + "," + format_double(absolute_residual) + "," +
       format_double(relative_residual) + ",";
  s += std::string(relative ? "relative" : "absolute") + "," + format_double(tolerance) + ",";
  s += to_string(verdict) + "," + csv_quote(skip_reason);
  return s;
}

nlohmann::json IdentityOptions::to_json() const {
  return {{"tol_alg", tol_alg},
          {"tol_fd", tol_fd},
          {"tol_fd_first", tol_fd_first},
          {"tol_covariance", tol_covariance},
          {"gate_tol", gate_tol},
          {"first", first.to_json()},
          {"laplacian", laplacian.to_json()},
          {"rank_tol", angles.rank_tol},
          {"complex_tol", angles.complex_tol},
          {"min_cluster_gap", min_cluster_gap},
          {"constant_angle_tol", constant_angle_tol},
          {"j_prime_samples", j_prime_samples},
          {"seed", seed}};
}

namespace {

IdentityReport start(const std::string& id, const Vector& p) {
  IdentityReport r;
  r.id = id;
  r.point = p;
  return r;
}

IdentityReport& skip(IdentityReport& r, const std::string& reason) {
  r.verdict = Verdict::Skipped;
  r.skip_reason = reason;
  return r;
}

IdentityReport& finish(IdentityReport& r, const std::vector<Complex>& lhs, const std::vector<Complex>& rhs,
                       double tol, bool relative) {
  double abs_res = 0.0, rhs_norm = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double d = std::abs(lhs[i] - rhs[i]);
    finite = finite && std::isfinite(d);
    abs_res = std::max(abs_res, d);
    rhs_norm = std::max(rhs_norm, std::abs(rhs[i]));
  }
  const std::vector<Complex>& l = lhs;
  const std::vector<Complex>& rr = rhs;
  bool any_imag = false;
  for (std::size_t i = 0; i < l.size(); ++i) any_imag = any_imag || l[i].imag() != 0.0 || rr[i].imag() != 0.0;
  r.lhs.clear();
  r.rhs.clear();
  for (std::size_t i = 0; i < l.size(); ++i) {
    r.lhs.push_back(l[i].real());
    r.rhs.push_back(rr[i].real());
    if (any_imag) {
      r.lhs.push_back(l[i].imag());
      r.rhs.push_back(rr[i].imag());
    }
  }
  r.absolute_residual = finite ? abs_res : std::numeric_limits<double>::infinity();
  r.relative_residual = r.absolute_residual / std::max(rhs_norm, 1.0);
  r.relative = relative;
  r.residual = relative ? r.relative_residual : r.absolute_residual;
  r.tolerance = tol;
  r.verdict = r.residual <= tol ? Verdict::Pass : Verdict::Fail;
  return r;
}

bool has_complex_direction(const AngleSpectrum& s, const AngleOptions& o) {
  return s.n() > 0 && s.cosines[0] >= 1.0 - o.complex_tol;
}

/// Frame-dependent quantities at one point.
struct FrameData {
  PointGeometry pg;
  Vector c;
  int n = 0;
  Matrix e;
  CMatrix z;    // chart coordinates of Z_1..Z_n, Z_1bar..Z_nbar
  CMatrix dfz;  // dF(Z_A)
  std::vector<Complex> gf_;

  Complex gf(int a, int b, int c3) const { return gf_[(a * 2 * n + b) * 2 * n + c3]; }
  double s2(int a) const { return 1.0 - c[a] * c[a]; }
};

FrameData frame_data(const PointGeometry& pg, const Vector& cosines, const Matrix& real_frame) {
  FrameData d;
  d.pg = pg;
  d.c = cosines;
  d.n = static_cast<int>(cosines.size());
  d.e = real_frame;
  d.z = real_frame.cast<Complex>() * complex_frame_coefficients(pg.m());
  d.dfz = pg.jet.df.cast<Complex>() * d.z;
  const int k = 2 * d.n;
  d.gf_.resize(static_cast<std::size_t>(k) * k * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      const CVector bv = pg.sff_apply(d.z.col(a), d.z.col(b));
      const CVector lowered = pg.g.cast<Complex>().transpose() * bv;
      for (int c = 0; c < k; ++c) {
        const CVector jdf = (pg.j * pg.jet.df).cast<Complex>() * d.z.col(c);
        d.gf_[(a * k + b) * k + c] = (lowered.transpose() * jdf)(0, 0);
      }
    }
  return d;
}

FrameData frame_data(const Immersion& f, const Vector& p, const AngleOptions& o) {
  const PointGeometry pg = point_geometry(f, p, o.rank_tol);
  const AdaptedFrame fr = adapted_frame(pg, o);
  return frame_data(pg, fr.cosines, fr.real_frame);
}

/// Skip reason when distinct nonzero cosine clusters (or a cluster and 0)
/// are closer than min_gap but not merged by cluster_tol.
std::string cluster_gap_problem(const Vector& c, int rank, const IdentityOptions& o) {
  for (int a = 0; a < rank; ++a) {
    const double next = a + 1 < rank ? c[a + 1] : 0.0;
    const double gap = c[a] - next;
    if (gap > o.angles.cluster_tol && gap < o.min_cluster_gap)
      return "Kahler angles nearly collide (gap " + format_double(gap) + ")";
  }
  return {};
}

Complex curvature_eval(const CurvatureTensor& r, const CVector& a, const CVector& b, const CVector& c,
                       const CVector& d) {
  return r.evaluate(a, b, c, d);
}

double laplacian_radius(const IdentityOptions& o) { return 2.0 * o.laplacian.reach(); }

}  // namespace

// Gates ---------------------------------------------------------------------------

double second_fundamental_form_norm(const Immersion& f, const Vector& p) {
  const PointGeometry pg = point_geometry(f, p);
  const Matrix u = Eigen::LLT<Matrix>(pg.g_m).matrixU();
  const Matrix e = u.inverse();
  double worst = 0.0;
  for (int i = 0; i < pg.m(); ++i)
    for (int j = 0; j < pg.m(); ++j) {
      Vector b = Vector::Zero(pg.ambient_dim());
      for (int l = 0; l < pg.ambient_dim(); ++l)
        for (int a = 0; a < pg.m(); ++a)
          for (int c = 0; c < pg.m(); ++c) b[l] += pg.sff(l, a, c) * e(a, i) * e(c, j);
      worst = std::max(worst, std::sqrt(std::max(0.0, b.dot(pg.g * b))));
    }
  return worst;
}

PluriminimalResidual pluriminimal_residual(const Immersion& f, const Vector& p, int samples,
                                           std::uint64_t seed, const AngleOptions& options) {
  const PointGeometry pg = point_geometry(f, p, options.rank_tol);
  PluriminimalResidual out;
  out.minimality = minimality_residual(f, p);
  const PolarDecomposition polar = polar_decompose(pullback_form(pg), options.rank_tol);
  out.rank = polar.rank / 2;
  if (out.rank == 0) {
    out.vacuous = true;
    return out;
  }
  const int m = pg.m();
  const int nn = pg.ambient_dim();
  const Matrix e = adapted_real_frame(polar, options);
  const Matrix jw = e.inverse() * polar.j_omega * e;  // frame basis
  const int r = polar.rank;
  const int d = m - r;

  // ∇dF on the frame
  std::vector<Vector> b(static_cast<std::size_t>(m) * m, Vector::Zero(nn));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < nn; ++l) {
        double s = 0.0;
        for (int a = 0; a < m; ++a)
          for (int c = 0; c < m; ++c) s += pg.sff(l, a, c) * e(a, i) * e(c, j);
        b[i * m + j][l] = s;
      }

  Matrix j0 = Matrix::Zero(d, d);
  for (int a = 0; a + 1 < d; a += 2) {
    j0(a + 1, a) = 1.0;
    j0(a, a + 1) = -1.0;
  }
  std::vector<Matrix> jprimes;
  if (d == 0) {
    jprimes.push_back(j0);
  } else {
    jprimes.push_back(j0);
    jprimes.push_back(-j0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    for (int s = 0; s < samples; ++s) {
      Matrix g(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = n01(rng);
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix q = qr.householderQ();
      const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int i = 0; i < d; ++i)
        if (rr(i, i) < 0) q.col(i) *= -1.0;
      jprimes.push_back(q * j0 * q.transpose());
    }
  }
  out.samples = static_cast<int>(jprimes.size());

  for (const Matrix& jp : jprimes) {
    Matrix jt = jw;
    jt.bottomRightCorner(d, d) = jp;
    double total = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Vector v = b[i * m + j];
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            const double w = jt(k, i) * jt(l, j);
            if (w != 0.0) v += w * b[k * m + l];
          }
        v *= 0.5;
        total += v.dot(pg.g * v);
      }
    out.residual = std::max(out.residual, std::sqrt(total));
  }
  return out;
}

// Pointwise checks ------------------------------------------------------------------

IdentityReport check_minimality(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("minimality", p);
  return finish(r, {minimality_residual(f, p)}, {0.0}, o.gate_tol, false);
}

IdentityReport check_pluriminimality(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("pluriminimality", p);
  const PluriminimalResidual pr = pluriminimal_residual(f, p, o.j_prime_samples, o.seed, o.angles);
  r.details = {{"rank", pr.rank}, {"samples", pr.samples}, {"vacuous", pr.vacuous}};
  return finish(r, {pr.residual, pr.minimality}, {0.0, 0.0}, o.gate_tol, false);
}

IdentityReport check_ricci_lemma(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("ricci-lemma", p);
  const PointGeometry pg = point_geometry(f, p, o.angles.rank_tol);
  const AdaptedFrame fr = adapted_frame(pg, o.angles);
  if (fr.cosines.size() > 0 && fr.cosines[0] >= 1.0 - o.angles.complex_tol)
    return skip(r, "complex direction at the point");
  const FrameData d = frame_data(pg, fr.cosines, fr.real_frame);
  const Vector q = pg.jet.value;
  const CurvatureTensor curv = curvature_at(f.ambient(), q);
  const Matrix ric = ricci_at(f.ambient(), q);
  const int nn = pg.ambient_dim();
  const CMatrix j = pg.j.cast<Complex>();
  const Tensor4& t = curv.components();

  CMatrix rhs = CMatrix::Zero(nn, nn);
  for (int mu = 0; mu < d.n; ++mu) {
    const CVector a = d.dfz.col(mu);
    const CVector w = j * d.dfz.col(d.n + mu) + kI * d.c[mu] * d.dfz.col(d.n + mu);
    CMatrix contracted = CMatrix::Zero(nn, nn);
    for (int u = 0; u < nn; ++u)
      for (int v = 0; v < nn; ++v) {
        Complex s = 0.0;
        for (int x = 0; x < nn; ++x)
          for (int y = 0; y < nn; ++y) s += t(u, v, x, y) * a[x] * w[y];
        contracted(u, v) = s;
      }
    rhs += (4.0 / d.s2(mu)) * contracted * j;
  }
  std::vector<Complex> lv, rv;
  for (int u = 0; u < nn; ++u)
    for (int v = 0; v < nn; ++v) {
      lv.push_back(ric(u, v));
      rv.push_back(rhs(u, v));
    }
  r.details = {{"max_abs_ricci", ric.cwiseAbs().maxCoeff()}};
  return finish(r, lv, rv, o.tol_alg, true);
}

IdentityReport check_gtilde_derivatives(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("gtilde-derivatives", p);
  const StratumCheck st = check_stratum(f, p, o.first.reach(), o.angles);
  if (!st.interior) return skip(r, st.reason);
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (const std::string gap = cluster_gap_problem(spec.cosines, spec.rank, o); !gap.empty())
    return skip(r, gap);
  try {
    const FrameField field(f, p, o.angles);
    const FrameConnection conn = frame_connection_coeffs(f, field, p, o.first);
    const FrameData d = frame_data(field.base_geometry(), field.base().cosines, field.base().real_frame);
    const int m = static_cast<int>(p.size());
    const CMatrix zc = complex_frame_coefficients(m);
    auto gt = [&](const Vector& x) -> Matrix {
      f.require_admissible(x);
      const PulledBackForm form = pullback_form(f, x);
      const PolarDecomposition polar = polar_decompose(form, o.angles.rank_tol);
      const Matrix e = field.at(x);
      return e.transpose() * form.g_m * polar.g_tilde * e;
    };
    std::vector<CMatrix> dg;
    for (int k = 0; k < m; ++k)
      dg.push_back(zc.transpose() * fd::partial(gt, p, k, o.first.h, o.first.order).cast<Complex>() * zc);

    std::vector<Complex> lv, rv;
    double lhs2 = 0.0, rhs2 = 0.0;
    const int n = d.n;
    for (int z = 0; z < 2 * n; ++z) {
      CMatrix dz = CMatrix::Zero(2 * n, 2 * n);
      for (int k = 0; k < m; ++k) dz += d.z(k, z) * dg[k];
      const CMatrix& cz = conn.complex_[z];
      for (int mu = 0; mu < n; ++mu)
        for (int ga = 0; ga < n; ++ga) {
          lv.push_back(dz(mu, n + ga));
          rv.push_back(kI * d.gf(z, mu, n + ga) - kI * d.gf(z, n + ga, mu) -
                       (d.c[mu] - d.c[ga]) * cz(mu, n + ga));
          const Complex r2 =
              -kI * d.gf(z, mu, ga) + kI * d.gf(z, ga, mu) + (d.c[mu] + d.c[ga]) * cz(mu, ga);
          lv.push_back(dz(mu, ga));
          rv.push_back(r2);
          lhs2 = std::max(lhs2, std::abs(dz(mu, ga)));
          rhs2 = std::max(rhs2, std::abs(r2));
        }
    }
    r.details = {{"max_abs_dgtilde_mu_gamma", lhs2}, {"max_abs_rhs_mu_gamma", rhs2}};
    return finish(r, lv, rv, o.tol_fd_first, false);
  } catch (const FrameContinuationError& e) {
    return skip(r, e.what());
  }
}

IdentityReport check_dkappa_formula(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("dkappa-formula", p);
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (has_complex_direction(spec, o.angles)) return skip(r, "complex direction at the point");
  const StratumCheck st = check_stratum(f, p, o.first.reach(), o.angles);
  if (!st.interior) return skip(r, st.reason);
  const FrameData d = frame_data(f, p, o.angles);
  const Vector dk = fd_differential([&](const Vector& x) { return kappa(f, x, o.angles); }, f, p, o.first);
  std::vector<Complex> lv, rv;
  for (int z = 0; z < 2 * d.n; ++z) {
    Complex l = 0.0;
    for (int k = 0; k < p.size(); ++k) l += 2.0 * d.z(k, z) * dk[k];
    Complex s = 0.0;
    for (int mu = 0; mu < d.n; ++mu)
      s += 8.0 * kI / d.s2(mu) * (d.gf(z, mu, d.n + mu) - d.gf(z, d.n + mu, mu));
    lv.push_back(l);
    rv.push_back(s);
  }
  return finish(r, lv, rv, o.tol_fd_first, false);
}

namespace {

/// Gates shared by the Δκ checks; empty when all pass.
std::string delta_kappa_gates(const Immersion& f, const Vector& p, const IdentityOptions& o,
                              bool pluriminimal, double radius) {
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (has_complex_direction(spec, o.angles)) return "complex direction at the point";
  const double h = minimality_residual(f, p);
  if (!(h < o.gate_tol)) return "not minimal (|H| = " + format_double(h) + ")";
  if (pluriminimal) {
    const PluriminimalResidual pr = pluriminimal_residual(f, p, o.j_prime_samples, o.seed, o.angles);
    if (!(pr.residual < o.gate_tol))
      return "not pluriminimal (residual " + format_double(pr.residual) + ")";
  }
  const StratumCheck st = check_stratum(f, p, radius, o.angles);
  if (!st.interior) return st.reason;
  return {};
}

}  // namespace

IdentityReport check_delta_kappa_pluriminimal(const Immersion& f, const Vector& p,
                                              const IdentityOptions& o) {
  IdentityReport r = start("delta-kappa-pluriminimal", p);
  if (const std::string g = delta_kappa_gates(f, p, o, true, laplacian_radius(o)); !g.empty())
    return skip(r, g);
  const double lap = laplace_beltrami([&](const Vector& x) { return kappa(f, x, o.angles); }, f, p,
                                      o.laplacian);
  const FrameData d = frame_data(f, p, o.angles);
  const Matrix ric = ricci_at(f.ambient(), d.pg.jet.value);
  const CMatrix jdf = (d.pg.j).cast<Complex>() * d.dfz;
  Complex sum = 0.0;
  double worst_real = 0.0;
  for (int b = 0; b < d.n; ++b) {
    const Complex s = (jdf.col(b).transpose() * ric.cast<Complex>() * d.dfz.col(d.n + b))(0, 0);
    worst_real = std::max(worst_real, std::abs(s.real()) / std::max(1.0, std::abs(s)));
    sum += s;
  }
  if (worst_real > o.tol_alg) {
    r.details = {{"ricci_summand_real_part", worst_real}};
    r.tolerance = o.tol_alg;
    r.residual = r.absolute_residual = r.relative_residual = worst_real;
    r.verdict = Verdict::Fail;
    return r;
  }
  const double ricci_side = (4.0 * kI * sum).real();
  std::vector<Complex> lv{lap}, rv{ricci_side};
  nlohmann::json details = {{"laplacian", lap}, {"ricci_sum", ricci_side}};
  if (const auto rc = f.ambient().einstein_constant()) {
    const double einstein_side = -2.0 * *rc * d.c.sum();
    lv.push_back(lap);
    rv.push_back(einstein_side);
    details["einstein"] = einstein_side;
    details["einstein_constant"] = *rc;
  }
  r.details = details;
  return finish(r, lv, rv, o.tol_fd, false);
}

DeltaKappaTerms delta_kappa_minimal_terms(const Immersion& f, const Vector& p, const IdentityOptions& o,
                                          const std::vector<double>& rotations) {
  const FrameField field(f, p, o.angles, rotations);
  const FrameConnection conn = frame_connection_coeffs(f, field, p, o.first);
  const FrameData d = frame_data(field.base_geometry(), field.base().cosines, field.base().real_frame);
  const int n = d.n;
  const Vector q = d.pg.jet.value;
  const CurvatureTensor curv = curvature_at(f.ambient(), q);
  const Matrix ric = ricci_at(f.ambient(), q);
  const CMatrix j = d.pg.j.cast<Complex>();
  const CMatrix jdf = j * d.dfz;

  DeltaKappaTerms t{};
  for (int b = 0; b < n; ++b)
    t.ricci += 4.0 * kI * (jdf.col(b).transpose() * ric.cast<Complex>() * d.dfz.col(n + b))(0, 0);
  for (int b = 0; b < n; ++b)
    for (int mu = 0; mu < n; ++mu) {
      const CVector w = jdf.col(n + mu) + kI * d.c[mu] * d.dfz.col(n + mu);
      const Complex rv = curvature_eval(curv, d.dfz.col(b), d.dfz.col(mu), d.dfz.col(n + b), w);
      t.curvature += 32.0 / d.s2(mu) * rv.imag();
    }
  for (int b = 0; b < n; ++b)
    for (int mu = 0; mu < n; ++mu)
      for (int ro = 0; ro < n; ++ro) {
        const double cm = d.c[mu], cr = d.c[ro];
        const double s2m = d.s2(mu), s2r = d.s2(ro);
        t.product -= 64.0 * (cm + cr) / (s2m * s2r) *
                     (d.gf(b, mu, n + ro) * d.gf(n + b, ro, n + mu)).real();
        t.difference += 32.0 * (cr - cm) / (s2m * s2r) *
                        (std::norm(d.gf(b, mu, ro)) + std::norm(d.gf(n + b, mu, ro)));
        t.connection += 32.0 * (cm + cr) / s2m *
                        (std::norm(conn.complex_[b](mu, ro)) + std::norm(conn.complex_[n + b](mu, ro)));
      }
  return t;
}

IdentityReport check_delta_kappa_minimal(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("delta-kappa-minimal", p);
  if (const std::string g = delta_kappa_gates(f, p, o, false, laplacian_radius(o)); !g.empty())
    return skip(r, g);
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (const std::string gap = cluster_gap_problem(spec.cosines, spec.rank, o); !gap.empty())
    return skip(r, gap);
  try {
    const DeltaKappaTerms t = delta_kappa_minimal_terms(f, p, o);
    const double lap = laplace_beltrami([&](const Vector& x) { return kappa(f, x, o.angles); }, f, p,
                                        o.laplacian);
    r.details = {{"ricci", t.ricci.real()},         {"curvature", t.curvature.real()},
                 {"product", t.product.real()},     {"difference", t.difference.real()},
                 {"connection", t.connection.real()}};
    return finish(r, {lap}, {t.total()}, o.tol_fd, false);
  } catch (const FrameContinuationError& e) {
    return skip(r, e.what());
  }
}

IdentityReport check_delta_kappa_minimal_covariance(const Immersion& f, const Vector& p,
                                                    const IdentityOptions& o) {
  IdentityReport r = start("delta-kappa-minimal-covariance", p);
  if (const std::string g = delta_kappa_gates(f, p, o, false, o.first.reach()); !g.empty())
    return skip(r, g);
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (const std::string gap = cluster_gap_problem(spec.cosines, spec.rank, o); !gap.empty())
    return skip(r, gap);
  std::mt19937_64 rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::vector<double> rotations(static_cast<std::size_t>(spec.n()));
  for (double& a : rotations) a = angle(rng);
  try {
    const Complex a = delta_kappa_minimal_terms(f, p, o).total();
    const Complex b = delta_kappa_minimal_terms(f, p, o, rotations).total();
    r.details = {{"rotations", rotations}};
    return finish(r, {a}, {b}, o.tol_covariance, false);
  } catch (const FrameContinuationError& e) {
    return skip(r, e.what());
  }
}

IdentityReport check_kahlerness_criteria(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("kahlerness-criteria", p);
  const AngleSpectrum spec = kahler_angles(f, p, o.angles);
  if (spec.rank != spec.n()) return skip(r, "F*w is degenerate at the point");
  const StratumCheck st = check_stratum(f, p, o.first.reach(), o.angles);
  if (!st.interior) return skip(r, st.reason);
  const FrameData d = frame_data(f, p, o.angles);
  const int n = d.n;
  const int m = static_cast<int>(p.size());

  auto jw = [&](const Vector& x) -> Matrix {
    f.require_admissible(x);
    return polar_decompose(pullback_form(f, x), o.angles.rank_tol).j_omega;
  };
  const Matrix j0 = jw(p);
  const Tensor3& gamma = d.pg.gamma_m;
  std::vector<Matrix> nab;
  for (int k = 0; k < m; ++k) {
    Matrix gk(m, m);
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < m; ++c) gk(a, c) = gamma(a, k, c);
    nab.push_back(fd::partial(jw, p, k, o.first.h, o.first.order) + gk * j0 - j0 * gk);
  }

  double res_a = 0.0, res_b = 0.0, res_c = 0.0, relation = 0.0;
  const CMatrix gm = d.pg.g_m.cast<Complex>();
  for (int z = 0; z < 2 * n; ++z) {
    CMatrix nz = CMatrix::Zero(m, m);
    for (int k = 0; k < m; ++k) nz += d.z(k, z) * nab[k].cast<Complex>();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const Complex nabla_w = -d.gf(z, a, b) + d.gf(z, b, a);
        const Complex nabla_j = (d.z.col(a).transpose() * nz.transpose() * gm * d.z.col(b))(0, 0);
        res_a = std::max(res_a, std::abs(covariant_deriv_pullback(d.pg, d.z.col(z), d.z.col(a), d.z.col(b))));
        res_b = std::max(res_b, std::abs(d.gf(z, a, b) - d.gf(z, b, a)));
        res_c = std::max(res_c, std::abs(nabla_j));
        relation = std::max(relation, std::abs(nabla_w - 0.5 * (d.c[a] + d.c[b]) * nabla_j));
      }
  }
  const double tol = o.tol_alg;
  const bool a = res_a < tol, b = res_b < tol, c = res_c < tol;
  const bool agree = a == b && b == c;
  r.lhs = {res_a, res_b, res_c};
  r.rhs = {0.0, 0.0, 0.0};
  r.absolute_residual = agree ? relation : std::max({relation, res_a, res_b, res_c});
  r.relative_residual = r.absolute_residual;
  r.residual = r.absolute_residual;
  r.tolerance = tol;
  r.verdict = r.residual <= tol ? Verdict::Pass : Verdict::Fail;
  r.details = {{"type_11", a}, {"symmetric", b}, {"parallel_j_omega", c}, {"agree", agree},
               {"relation_residual", relation}};
  return r;
}

IdentityReport check_gauss_flat(const Immersion& f, const Vector& p, const IdentityOptions& o) {
  IdentityReport r = start("gauss-flat", p);
  if (!f.ambient().is_flat()) return skip(r, "ambient is not flat");
  const double h = minimality_residual(f, p);
  if (!(h < o.gate_tol)) return skip(r, "not minimal (|H| = " + format_double(h) + ")");
  const FrameData d = frame_data(f, p, o.angles);
  const CurvatureTensor rm = intrinsic_curvature_fd(f, p, o.first);
  const int n = d.n;
  Complex lhs = 0.0;
  double rhs = 0.0;
  const CMatrix g = d.pg.g.cast<Complex>();
  for (int mu = 0; mu < n; ++mu)
    for (int a = 0; a < n; ++a) {
      lhs += rm.evaluate(CVector(d.z.col(mu)), CVector(d.z.col(a)), CVector(d.z.col(n + mu)),
                         CVector(d.z.col(n + a)));
      const CVector b = d.pg.sff_apply(d.z.col(a), d.z.col(n + mu));
      rhs -= (b.adjoint() * g * b)(0, 0).real();
    }
  return finish(r, {lhs}, {rhs}, o.tol_fd, false);
}

// Grid checks ------------------------------------------------------------------------

IdentityReport check_totally_geodesic_psi(const Immersion& f, const std::vector<Vector>& points,
                                          const IdentityOptions& o) {
  IdentityReport r = start("totally-geodesic-psi", Vector());
  if (points.empty()) return skip(r, "no sample points");
  double worst = 0.0;
  double psi_min = std::numeric_limits<double>::infinity();
  for (const Vector& p : points) {
    const double b = second_fundamental_form_norm(f, p);
    if (!(b < o.gate_tol)) return skip(r, "not totally geodesic (|B| = " + format_double(b) + ")");
    if (has_complex_direction(kahler_angles(f, p, o.angles), o.angles))
      return skip(r, "complex direction on the grid");
    const PointGeometry pg = point_geometry(f, p, o.angles.rank_tol);
    const Matrix psi = pg.j.transpose() * ricci_at(f.ambient(), pg.jet.value);
    worst = std::max(worst, (pg.jet.df.transpose() * psi * pg.jet.df).cwiseAbs().maxCoeff());
    psi_min = std::min(psi_min, psi.cwiseAbs().maxCoeff());
  }
  r.details = {{"points", points.size()}, {"min_psi_norm", psi_min}};
  return finish(r, {worst}, {0.0}, o.tol_alg, false);
}

IdentityReport check_constant_angle_obstruction(const Immersion& f, const std::vector<Vector>& points,
                                                const IdentityOptions& o) {
  IdentityReport r = start("constant-angle-obstruction", Vector());
  if (points.empty()) return skip(r, "no sample points");
  std::vector<AngleSpectrum> spectra;
  bool lagrangian = true;
  for (const Vector& p : points) {
    spectra.push_back(kahler_angles(f, p, o.angles));
    if (has_complex_direction(spectra.back(), o.angles)) return skip(r, "complex direction on the grid");
    lagrangian = lagrangian && spectra.back().rank == 0;
  }
  if (lagrangian) return skip(r, "Lagrangian: the obstruction assumes a non-Lagrangian immersion");
  double spread = 0.0;
  for (int a = 0; a < spectra[0].n(); ++a) {
    double lo = spectra[0].cosines[a], hi = lo;
    for (const auto& s : spectra) {
      lo = std::min(lo, s.cosines[a]);
      hi = std::max(hi, s.cosines[a]);
    }
    spread = std::max(spread, hi - lo);
  }
  if (spread > o.constant_angle_tol)
    return skip(r, "Kahler angles are not constant (spread " + format_double(spread) + ")");
  for (const Vector& p : points) {
    const PluriminimalResidual pr = pluriminimal_residual(f, p, o.j_prime_samples, o.seed, o.angles);
    if (!(pr.minimality < o.gate_tol)) return skip(r, "not minimal");
    if (!(pr.residual < o.gate_tol)) return skip(r, "not pluriminimal");
  }
  const auto rc = f.ambient().einstein_constant();
  if (!rc) return skip(r, "ambient is not Kahler-Einstein");
  const double sum = spectra[0].cosines.sum();
  r.details = {{"einstein_constant", *rc}, {"sum_cos", sum}, {"spread", spread}, {"points", points.size()}};
  return finish(r, {*rc * sum}, {0.0}, o.tol_alg, false);
}

// Registry ------------------------------------------------------------------------------

const std::vector<IdentityInfo>& identity_catalog() {
  static const std::vector<IdentityInfo> ids = {
      {"minimality", "|H| below the gate tolerance", false},
      {"pluriminimality", "(1,1)-part of the second fundamental form for J_w + J' samples", false},
      {"ricci-lemma", "Ricci tensor of N from the adapted frame and curvature", false},
      {"totally-geodesic-psi", "F*Psi = 0 for totally geodesic immersions, Psi = Ricci(J., .)", true},
      {"gtilde-derivatives", "derivatives of g~ in the continued frame at the base point", false},
      {"dkappa-formula", "d kappa from second fundamental form contractions", false},
      {"delta-kappa-pluriminimal", "Laplacian of kappa = 4i sum Ricci(JdF(b), dF(bbar)) = -2R sum cos",
       false},
      {"delta-kappa-minimal", "Laplacian of kappa against the five-term expansion", false},
      {"delta-kappa-minimal-covariance", "five-term expansion under eigenspace rotations", false},
      {"constant-angle-obstruction", "constant angles force R sum cos = 0", true},
      {"kahlerness-criteria", "three equivalent Kahler criteria agree", false},
      {"gauss-flat", "intrinsic curvature sum vs second fundamental form in flat N", false},
  };
  return ids;
}

std::vector<std::string> resolve_identities(const std::string& selection) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= selection.size()) {
    const std::size_t comma = selection.find(',', start);
    std::string item = selection.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item == "all") {
      for (const auto& info : identity_catalog())
        if (std::find(out.begin(), out.end(), info.id) == out.end()) out.push_back(info.id);
    } else if (!item.empty()) {
      const auto& cat = identity_catalog();
      if (std::none_of(cat.begin(), cat.end(), [&](const IdentityInfo& i) { return i.id == item; }))
        throw UnknownIdError("unknown identity id '" + item + "'");
      if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

using PointCheck = IdentityReport (*)(const Immersion&, const Vector&, const IdentityOptions&);
using GridCheck = IdentityReport (*)(const Immersion&, const std::vector<Vector>&, const IdentityOptions&);

PointCheck point_check(const std::string& id) {
  if (id == "minimality") return check_minimality;
  if (id == "pluriminimality") return check_pluriminimality;
  if (id == "ricci-lemma") return check_ricci_lemma;
  if (id == "gtilde-derivatives") return check_gtilde_derivatives;
  if (id == "dkappa-formula") return check_dkappa_formula;
  if (id == "delta-kappa-pluriminimal") return check_delta_kappa_pluriminimal;
  if (id == "delta-kappa-minimal") return check_delta_kappa_minimal;
  if (id == "delta-kappa-minimal-covariance") return check_delta_kappa_minimal_covariance;
  if (id == "kahlerness-criteria") return check_kahlerness_criteria;
  if (id == "gauss-flat") return check_gauss_flat;
  return nullptr;
}

GridCheck grid_check(const std::string& id) {
  if (id == "totally-geodesic-psi") return check_totally_geodesic_psi;
  if (id == "constant-angle-obstruction") return check_constant_angle_obstruction;
  return nullptr;
}

template <class Fn>
IdentityReport guard(const std::string& id, const Vector& p, Fn&& fn) {
  try {
    return fn();
  } catch (const DomainError& e) {
    IdentityReport r = start(id, p);
    return skip(r, std::string("outside the domain: ") + e.what());
  } catch (const DegenerateSpectrumError& e) {
    IdentityReport r = start(id, p);
    return skip(r, e.what());
  } catch (const ComplexDirectionError& e) {
    IdentityReport r = start(id, p);
    return skip(r, e.what());
  } catch (const FrameContinuationError& e) {
    IdentityReport r = start(id, p);
    return skip(r, e.what());
  } catch (const DegenerateImmersionError& e) {
    IdentityReport r = start(id, p);
    return skip(r, e.what());
  }
}

}  // namespace

std::vector<IdentityReport> run_identity(const std::string& id, const Immersion& f,
                                         const std::vector<Vector>& points, const IdentityOptions& o) {
  std::vector<IdentityReport> out;
  if (const GridCheck g = grid_check(id)) {
    out.push_back(guard(id, Vector(), [&] { return g(f, points, o); }));
    return out;
  }
  const PointCheck c = point_check(id);
  if (!c) throw UnknownIdError("unknown identity id '" + id + "'");
  for (const Vector& p : points) out.push_back(guard(id, p, [&] { return c(f, p, o); }));
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<IdentityReport>& reports) {
  for (const auto& r : reports) out << r.to_json().dump() << '\n';
}

void write_csv(std::ostream& out, const std::vector<IdentityReport>& reports) {
  out << IdentityReport::csv_header() << '\n';
  for (const auto& r : reports) out << r.to_csv() << '\n';
}

}  // namespace kahler
