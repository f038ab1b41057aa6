#include "kahler_lens/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "kahler_lens/angles.hpp"
#include "kahler_lens/catalog.hpp"

namespace kahler {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Vector to_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string format_point(const Vector& p) {
  std::string s = "(";
  for (int i = 0; i < p.size(); ++i) s += (i ? ", " : "") + format_double(p[i]);
  return s + ")";
}

/// 1-based line of the first occurrence of "key" in a JSON text.
int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 1;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

// Grid ------------------------------------------------------------------------------

GridSpec GridSpec::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw ConfigError("empty grid specification");
  GridSpec g;
  if (std::all_of(text.begin(), text.end(), [](char c) { return std::isdigit(c) || c == 'x'; })) {
    if (text.front() == 'x' || text.back() == 'x') throw ConfigError("invalid grid resolution '" + text + "'");
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
      if (part.empty()) throw ConfigError("invalid grid resolution '" + text + "'");
      const int n = std::stoi(part);
      if (n < 1) throw ConfigError("grid resolution must be positive");
      g.resolution.push_back(n);
    }
    return g;
  }
  std::string json_text = text;
  if (text.front() != '{') {
    const auto content = read_file(text);
    if (!content) throw ConfigError("grid '" + text + "' is neither a resolution, JSON, nor a readable file");
    json_text = *content;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  try {
    if (j.contains("points")) {
      for (const auto& p : j.at("points")) g.points.push_back(to_vector(p));
      if (g.points.empty()) throw ConfigError("grid: empty point list");
      return g;
    }
    if (j.contains("box")) g.box = Box{to_vector(j["box"].at("lower")), to_vector(j["box"].at("upper"))};
    const auto& r = j.at("resolution");
    if (r.is_number_integer()) {
      g.resolution.push_back(r.get<int>());
    } else {
      g.resolution = r.get<std::vector<int>>();
    }
    for (int n : g.resolution)
      if (n < 1) throw ConfigError("grid resolution must be positive");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return g;
}

std::vector<Vector> GridSpec::points_for(const Immersion& f) const {
  const int m = f.domain_dim();
  const Box domain = f.domain();
  std::vector<Vector> out;
  if (!points.empty()) {
    for (const Vector& p : points) {
      if (p.size() != m)
        throw ConfigError("grid point " + format_point(p) + " has dimension " + std::to_string(p.size()) +
                          ", expected " + std::to_string(m));
      if (!f.admissible(p)) throw DomainError("grid point " + format_point(p) + " outside the domain");
      out.push_back(p);
    }
    return out;
  }
  std::vector<int> res = resolution;
  if (res.size() == 1) res.assign(static_cast<std::size_t>(m), res[0]);
  if (static_cast<int>(res.size()) != m)
    throw ConfigError("grid resolution has " + std::to_string(res.size()) + " axes, expected " +
                      std::to_string(m));
  const Box b = box.value_or(domain);
  if (b.lower.size() != m || b.upper.size() != m) throw ConfigError("grid box has the wrong dimension");
  for (int i = 0; i < m; ++i)
    if (b.lower[i] < domain.lower[i] || b.upper[i] > domain.upper[i] || b.lower[i] > b.upper[i])
      throw DomainError("grid box is not inside the domain of " + f.id());
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  while (true) {
    Vector p(m);
    for (int i = 0; i < m; ++i)
      p[i] = b.lower[i] + (idx[i] + 0.5) * (b.upper[i] - b.lower[i]) / res[i];
    if (!f.admissible(p)) throw DomainError("grid point " + format_point(p) + " outside the domain");
    out.push_back(p);
    int axis = m - 1;
    while (axis >= 0 && ++idx[axis] == res[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return out;
}

// Config ---------------------------------------------------------------------------

void RunConfig::set_tol_fd(double tol) {
  options.tol_fd = tol;
  options.tol_fd_first = std::min(options.tol_fd_first, tol);
}

void RunConfig::set_fd_step(double h) {
  options.first.h = h;
  options.laplacian.h = h;
}

void RunConfig::set_fd_order(int order) {
  options.first.order = order;
  options.laplacian.order = order;
}

void RunConfig::set_richardson(bool on) { options.laplacian.richardson = on; }

void RunConfig::validate() const {
  for (double t : {options.tol_alg, options.tol_fd, options.tol_fd_first})
    if (!(t > 0.0)) throw ConfigError("tolerances must be positive");
  try {
    options.first.validate();
    options.laplacian.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  resolve_identities(identities);
}

nlohmann::json RunConfig::to_json() const {
  return {{"immersion", immersion}, {"grid", grid}, {"identities", identities}, {"options", options.to_json()}};
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ":1: configuration must be a JSON object");
  RunConfig c;
  static const std::set<std::string> known = {"immersion", "grid",     "identities", "tol_alg",
                                              "tol_fd",    "fd_step",  "fd_order",   "richardson",
                                              "seed",      "out"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    const std::string where = source + ":" + std::to_string(line_of_key(text, key)) + ": ";
    if (!known.count(key)) throw ConfigError(where + "unknown key \"" + key + "\"");
    try {
      if (key == "immersion") {
        c.immersion = v.is_string() ? v.get<std::string>() : v.dump();
      } else if (key == "grid") {
        c.grid = v.is_string() ? v.get<std::string>() : v.is_number_integer() ? std::to_string(v.get<int>()) : v.dump();
      } else if (key == "identities") {
        if (v.is_array()) {
          std::string s;
          for (const auto& x : v) s += (s.empty() ? "" : ",") + x.get<std::string>();
          c.identities = s;
        } else {
          c.identities = v.get<std::string>();
        }
      } else if (key == "tol_alg") {
        c.options.tol_alg = v.get<double>();
      } else if (key == "tol_fd") {
        c.set_tol_fd(v.get<double>());
      } else if (key == "fd_step") {
        c.set_fd_step(v.get<double>());
      } else if (key == "fd_order") {
        c.set_fd_order(v.get<int>());
      } else if (key == "richardson") {
        c.set_richardson(v.get<bool>());
      } else if (key == "seed") {
        c.options.seed = v.get<std::uint64_t>();
      } else if (key == "out") {
        c.out = v.get<std::string>();
      }
    } catch (const nlohmann::json::type_error& e) {
      throw ConfigError(where + "bad value for \"" + key + "\": " + e.what());
    }
    if (key == "fd_order" || key == "fd_step") {
      try {
        c.options.first.validate();
        c.options.laplacian.validate();
      } catch (const Error& e) {
        throw ConfigError(where + e.what());
      }
    }
    if ((key == "tol_alg" || key == "tol_fd") && !(c.options.tol_alg > 0.0 && c.options.tol_fd > 0.0))
      throw ConfigError(where + "tolerances must be positive");
    if (key == "identities") {
      try {
        resolve_identities(c.identities);
      } catch (const UnknownIdError& e) {
        throw ConfigError(where + e.what());
      }
    }
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  const auto text = read_file(path);
  if (!text) throw ConfigError("cannot read configuration file '" + path + "'");
  return from_json_text(*text, path);
}

// Threads ---------------------------------------------------------------------------

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KAHLER_LENS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Analyze ----------------------------------------------------------------------------

std::vector<AnalyzeRow> analyze_points(const Immersion& f, const std::vector<Vector>& points,
                                       const RunConfig& config) {
  const IdentityOptions& o = config.options;
  std::vector<AnalyzeRow> rows(points.size());
  parallel_for(points.size(), thread_count(config.threads), [&](std::size_t i) {
    AnalyzeRow& row = rows[i];
    row.point = points[i];
    try {
      const AngleSpectrum s = kahler_angles(f, points[i], o.angles);
      row.cosines = s.cosines;
      row.rank = s.rank;
      const DirectionClassification cls = classify_directions(s.cosines);
      row.kappa = cls.has_complex ? std::numeric_limits<double>::infinity() : kappa_from_cosines(s.cosines);
      row.minimality = minimality_residual(f, points[i]);
      row.pluriminimality = pluriminimal_residual(f, points[i], o.j_prime_samples, o.seed, o.angles).residual;
      if (cls.is_lagrangian_point) row.flags.push_back("lagrangian_point");
      if (cls.is_complex_point) row.flags.push_back("complex_point");
      if (cls.has_lagrangian) row.flags.push_back("has_lagrangian");
      if (cls.has_complex) row.flags.push_back("has_complex");
    } catch (const DegenerateImmersionError&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.cosines = Vector::Constant(f.domain_dim() / 2, nan);
      row.rank = -1;
      row.kappa = row.minimality = row.pluriminimality = nan;
      row.flags = {"degenerate"};
    }
  });
  return rows;
}

void write_analyze_csv(std::ostream& out, const std::vector<AnalyzeRow>& rows) {
  if (rows.empty()) return;
  const auto m = rows[0].point.size();
  const auto n = rows[0].cosines.size();
  for (Eigen::Index i = 0; i < m; ++i) out << "p" << i + 1 << ",";
  for (Eigen::Index i = 0; i < n; ++i) out << "cos" << i + 1 << ",";
  out << "rank,kappa,minimality_residual,pluriminimality_residual,flags\n";
  for (const auto& r : rows) {
    for (Eigen::Index i = 0; i < m; ++i) out << format_double(r.point[i]) << ",";
    for (Eigen::Index i = 0; i < n; ++i) out << format_double(r.cosines[i]) << ",";
    out << r.rank << "," << format_double(r.kappa) << "," << format_double(r.minimality) << ","
        << format_double(r.pluriminimality) << ",";
    for (std::size_t k = 0; k < r.flags.size(); ++k) out << (k ? ";" : "") << r.flags[k];
    out << "\n";
  }
}

nlohmann::json analyze_summary(const Immersion& f, const std::vector<AnalyzeRow>& rows,
                               const RunConfig& config) {
  double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
  int infinite = 0;
  std::map<std::string, int> ranks;
  int has_lag = 0, has_cplx = 0, lag_pts = 0, cplx_pts = 0, degenerate = 0;
  for (const auto& r : rows) {
    const auto has = [&](const char* flag) { return std::find(r.flags.begin(), r.flags.end(), flag) != r.flags.end(); };
    if (has("degenerate")) {
      ++degenerate;
      continue;
    }
    if (std::isinf(r.kappa)) {
      ++infinite;
    } else {
      kmin = std::min(kmin, r.kappa);
      kmax = std::max(kmax, r.kappa);
    }
    ++ranks[std::to_string(r.rank)];
    has_lag += has("has_lagrangian");
    has_cplx += has("has_complex");
    lag_pts += has("lagrangian_point");
    cplx_pts += has("complex_point");
  }
  nlohmann::json kappa = {{"infinite", infinite}};
  if (kmin <= kmax) {
    kappa["min"] = kmin;
    kappa["max"] = kmax;
  }
  return {{"schema_version", kReportSchemaVersion},
          {"verb", "analyze"},
          {"immersion", f.descriptor()},
          {"config", config.to_json()},
          {"points", rows.size()},
          {"degenerate_points", degenerate},
          {"kappa", kappa},
          {"rank_histogram", ranks},
          {"classification",
           {{"has_lagrangian", has_lag},
            {"has_complex", has_cplx},
            {"lagrangian_points", lag_pts},
            {"complex_points", cplx_pts}}}};
}

// Verify -----------------------------------------------------------------------------

std::vector<IdentityReport> verify_points(const Immersion& f, const std::vector<Vector>& points,
                                          const RunConfig& config) {
  struct Task {
    std::string id;
    int point;  // -1 for grid checks
  };
  std::vector<Task> tasks;
  for (const auto& id : resolve_identities(config.identities)) {
    const auto& cat = identity_catalog();
    const bool grid = std::find_if(cat.begin(), cat.end(), [&](const IdentityInfo& i) {
                        return i.id == id;
                      })->grid;
    if (grid) {
      tasks.push_back({id, -1});
    } else {
      for (std::size_t i = 0; i < points.size(); ++i) tasks.push_back({id, static_cast<int>(i)});
    }
  }
  std::vector<IdentityReport> reports(tasks.size());
  parallel_for(tasks.size(), thread_count(config.threads), [&](std::size_t t) {
    const Task& task = tasks[t];
    const std::vector<Vector> pts =
        task.point < 0 ? points : std::vector<Vector>{points[static_cast<std::size_t>(task.point)]};
    reports[t] = run_identity(task.id, f, pts, config.options).front();
  });
  return reports;
}

nlohmann::json verify_summary(const Immersion& f, const std::vector<IdentityReport>& reports,
                              const RunConfig& config) {
  nlohmann::json by_id = nlohmann::json::object();
  std::map<std::string, int> reasons;
  int pass = 0, fail = 0, skipped = 0;
  for (const auto& r : reports) {
    auto& e = by_id[r.id];
    if (e.is_null()) e = {{"pass", 0}, {"fail", 0}, {"skipped", 0}, {"max_residual", 0.0}};
    e[to_string(r.verdict)] = e[to_string(r.verdict)].get<int>() + 1;
    if (r.verdict == Verdict::Skipped) {
      ++skipped;
      ++reasons[r.skip_reason];
    } else {
      (r.verdict == Verdict::Pass ? pass : fail)++;
      const double res = std::isfinite(r.residual) ? r.residual : std::numeric_limits<double>::max();
      e["max_residual"] = std::max(e["max_residual"].get<double>(), res);
    }
  }
  return {{"schema_version", kReportSchemaVersion},
          {"verb", "verify"},
          {"immersion", f.descriptor()},
          {"config", config.to_json()},
          {"totals", {{"pass", pass}, {"fail", fail}, {"skipped", skipped}}},
          {"by_identity", by_id},
          {"skip_reasons", reasons},
          {"exit_status", fail > 0 ? 1 : 0}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  return out;
}

std::filesystem::path prepare_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

template <class Fn>
int guarded_run(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace

int run_analyze(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded_run(err, [&] {
    config.validate();
    const ImmersionPtr f = immersion_from_string(config.immersion);
    const auto points = GridSpec::parse(config.grid).points_for(*f);
    const auto rows = analyze_points(*f, points, config);
    const auto summary = analyze_summary(*f, rows, config);
    if (config.out.empty()) {
      write_analyze_csv(out, rows);
      return 0;
    }
    const auto dir = prepare_dir(config.out);
    auto csv = open_output(dir, "analyze.csv");
    write_analyze_csv(csv, rows);
    open_output(dir, "analyze_summary.json") << summary.dump(2) << "\n";
    out << "analyzed " << rows.size() << " points of " << f->id() << "; rank histogram "
        << summary["rank_histogram"].dump() << "\n";
    return 0;
  });
}

int run_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded_run(err, [&] {
    config.validate();
    const ImmersionPtr f = immersion_from_string(config.immersion);
    const auto points = GridSpec::parse(config.grid).points_for(*f);
    const auto reports = verify_points(*f, points, config);
    const auto summary = verify_summary(*f, reports, config);
    std::ostream* human = &err;
    if (config.out.empty()) {
      write_jsonl(out, reports);
    } else {
      const auto dir = prepare_dir(config.out);
      auto jsonl = open_output(dir, "verify.jsonl");
      write_jsonl(jsonl, reports);
      auto csv = open_output(dir, "verify.csv");
      write_csv(csv, reports);
      open_output(dir, "verify_summary.json") << summary.dump(2) << "\n";
      human = &out;
    }
    for (auto it = summary["by_identity"].begin(); it != summary["by_identity"].end(); ++it) {
      const auto& e = it.value();
      *human << it.key() << ": " << e["pass"] << " pass, " << e["fail"] << " fail, " << e["skipped"]
             << " skipped, max residual " << format_double(e["max_residual"].get<double>()) << "\n";
    }
    const auto& t = summary["totals"];
    *human << "total: " << t["pass"] << " pass, " << t["fail"] << " fail, " << t["skipped"] << " skipped\n";
    return summary["exit_status"].get<int>();
  });
}

int run_catalog_list(std::ostream& out) {
  std::size_t width = 0;
  for (const auto& e : catalog_entries()) width = std::max(width, e.id.size());
  for (const auto& e : catalog_entries())
    out << e.id << std::string(width + 2 - e.id.size(), ' ') << e.description << "\n";
  return 0;
}

int run_catalog_describe(const std::string& id, std::ostream& out, std::ostream& err) {
  return guarded_run(err, [&] {
    out << describe_entry(id).dump(2) << "\n";
    return 0;
  });
}

}  // namespace kahler
