#pragma once

// Batch runs: per-point analysis and identity verification over grids.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler_lens/identities.hpp"
#include "kahler_lens/immersion.hpp"

namespace kahler {

/// "N" (N cell centers per axis over the immersion's domain), "N1xN2x..."
/// or JSON: {"box": {"lower", "upper"}, "resolution": N | [..]} or
/// {"points": [[..], ..]}. A path to a file holding the JSON also works.
struct GridSpec {
  std::optional<Box> box;
  std::vector<int> resolution;
  std::vector<Vector> points;

  static GridSpec parse(const std::string& text);
  /// Points in row-major grid order; DomainError when outside the domain.
  std::vector<Vector> points_for(const Immersion& f) const;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string immersion = "weierstrass";
  std::string grid = "5";
  std::string identities = "all";
  IdentityOptions options;
  std::string out;  // directory; empty writes to the given streams
  int threads = 0;  // 0: KAHLER_LENS_THREADS or hardware concurrency

  /// JSON object with keys immersion, grid, identities, tol_alg, tol_fd,
  /// fd_step, fd_order, richardson, seed, out. ConfigError messages name
  /// the source line.
  static RunConfig from_json_text(const std::string& text, const std::string& source = "config");
  static RunConfig from_file(const std::string& path);

  void set_tol_fd(double tol);
  void set_fd_step(double h);
  void set_fd_order(int order);
  void set_richardson(bool on);
  void validate() const;
  nlohmann::json to_json() const;
};

/// Threads used for a run: explicit request, else KAHLER_LENS_THREADS,
/// else hardware concurrency; at least 1.
int thread_count(int requested = 0);

/// Applies fn to indices 0..count-1 on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

struct AnalyzeRow {
  Vector point;
  Vector cosines;
  int rank = 0;
  double kappa = 0.0;
  double minimality = 0.0;
  double pluriminimality = 0.0;
  std::vector<std::string> flags;
};

std::vector<AnalyzeRow> analyze_points(const Immersion& f, const std::vector<Vector>& points,
                                       const RunConfig& config);
void write_analyze_csv(std::ostream& out, const std::vector<AnalyzeRow>& rows);
nlohmann::json analyze_summary(const Immersion& f, const std::vector<AnalyzeRow>& rows,
                               const RunConfig& config);

std::vector<IdentityReport> verify_points(const Immersion& f, const std::vector<Vector>& points,
                                          const RunConfig& config);
nlohmann::json verify_summary(const Immersion& f, const std::vector<IdentityReport>& reports,
                              const RunConfig& config);

/// Full verbs. Return the process exit status: 0 success, 1 failed checks,
/// 2 configuration or input errors.
int run_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int run_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int run_catalog_list(std::ostream& out);
int run_catalog_describe(const std::string& id, std::ostream& out, std::ostream& err);

}  // namespace kahler
