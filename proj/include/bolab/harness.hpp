#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bolab/bo_engine.hpp"

namespace bolab::harness {

using json = nlohmann::json;
using Mat = Eigen::MatrixXd;

inline constexpr const char* kFormatTag = "bo-inner-lab/v1";

struct CaseStudyConfig {
  std::string id = "case";
  std::string benchmark = "mueller-brown";
  int n_initial = 3;
  acq::KappaPolicy policy = acq::FixedKappa{2.0};
  bo::TerminationConfig tc;
  int n_experiments = 1;
  int runs_per_experiment = 1;
  std::vector<bo::Solver> solvers{bo::Solver::ILS, bo::Solver::IMS, bo::Solver::BNB};
  std::uint64_t master_seed = 0;
  global::BnbOptions bnb;
  int ims_restarts = 5;
  bench::BenchmarkOptions bench_options;
  /// Deterministic solvers run once per experiment and are copied to the other run slots.
  bool replicate_deterministic = true;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Flat key=value file with sections [case], [kappa], [tc] and one section per
/// solver ([ILS], [IMS], [BNB]). Throws ConfigError with "section.key" paths.
CaseStudyConfig parse_config(std::istream& in);
CaseStudyConfig load_config(const std::string& path);

struct DesignSet {
  std::string benchmark;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<Mat> designs;  ///< one N x D raw matrix per experiment
};

/// Latin hypercube designs; experiment e draws from derive_seed(seed, fnv1a64(benchmark), e, fnv1a64("design"), 0).
DesignSet gen_designs(const bench::BenchmarkHandle& bench, int n, int n_experiments, std::uint64_t seed);

/// Header line then one JSON object per experiment.
std::string designs_to_text(const DesignSet& set);
DesignSet designs_from_text(const std::string& text);
void write_designs(const std::string& path, const DesignSet& set);
DesignSet read_designs(const std::string& path);

json record_to_json(const bo::RunRecord& r);
bo::RunRecord record_from_json(const json& j);

struct RecordKey {
  std::string case_id;
  int dataset = 0;
  std::string solver;
  int run = 0;
  auto operator<=>(const RecordKey&) const = default;
};

RecordKey key_of(const bo::RunRecord& r);

/// Append-only JSON-lines log of run records. Appends are serialized and
/// flushed per record; an incomplete trailing line from an interrupted run is
/// ignored on reopen.
class RunStore {
 public:
  explicit RunStore(std::string path);

  bool contains(const RecordKey& key) const;
  std::optional<bo::RunRecord> find(const RecordKey& key) const;
  /// Throws bolab::Error on a duplicate key.
  void append(const bo::RunRecord& record);
  /// Records sorted by key.
  std::vector<bo::RunRecord> records() const;
  /// Rewrites the file as header plus records sorted by key.
  void canonicalize();
  std::size_t size() const;

 private:
  void load();

  std::string path_;
  mutable std::mutex mutex_;
  std::map<RecordKey, std::string> lines_;
};

std::vector<bo::RunRecord> read_store(const std::string& path);

/// Per-run seed: derive_seed(master, fnv1a64(case id), dataset, fnv1a64(solver tag), run).
std::uint64_t run_seed(const CaseStudyConfig& cfg, int dataset, bo::Solver solver, int run);

struct RunSummary {
  int executed = 0;
  int replicated = 0;
  int skipped = 0;
  bool interrupted = false;
};

/// Executes the solver x experiment x run grid on `workers` threads, skipping
/// keys already in the store. `max_tasks` stops early after that many
/// executions (an interruption); the store stays resumable. The store is
/// canonicalized when the grid completes.
RunSummary run_case_study(const CaseStudyConfig& cfg, const DesignSet& designs, const std::string& store_path,
                          int workers = 1, std::optional<int> max_tasks = std::nullopt);

struct AnalyzeOptions {
  std::uint64_t seed = 0;  ///< only used by the approximate max-min search
};

/// Report with the success table, filtered and unfiltered iteration
/// statistics, paired t-tests, conditional MLE, max-min tests and cap curves.
/// Sections that cannot be computed carry an "absent" reason.
json analyze(const std::vector<bo::RunRecord>& records, const AnalyzeOptions& options = {});

/// Pretty-printed report followed by a newline.
std::string report_text(const json& report);

}  // namespace bolab::harness
