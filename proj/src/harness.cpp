#include "bolab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bolab/analysis_stats.hpp"
#include "bolab/errors.hpp"

namespace bolab::harness {
namespace {

namespace pt = boost::property_tree;

// ---------------------------------------------------------------- config

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"case",
       {"id", "benchmark", "n_initial", "n_experiments", "runs_per_experiment", "solvers", "master_seed",
        "replicate_deterministic", "success_tol", "gkls_seed", "gkls_vertex_value"}},
      {"kappa", {"policy", "value", "M", "delta", "scale", "dims"}},
      {"tc", {"eps_x1", "eps_x2", "eps_f_rel", "eps_f_abs", "max_iter"}},
      {"ILS", {}},
      {"IMS", {"restarts"}},
      {"BNB", {"eps_r", "eps_a", "time_limit", "node_cap"}},
  };
  return keys;
}

template <typename T>
std::optional<T> get(const pt::ptree& root, const std::string& section, const std::string& key) {
  const auto sec = root.get_child_optional(section);
  if (!sec) return std::nullopt;
  const auto raw = sec->get_optional<std::string>(key);
  if (!raw) return std::nullopt;
  if constexpr (std::is_same_v<T, std::string>) {
    return *raw;
  } else {
    const auto v = sec->get_optional<T>(key);
    if (!v) throw ConfigError(section + "." + key, "cannot parse value '" + *raw + "'");
    return *v;
  }
}

template <typename T>
void assign(const pt::ptree& root, const std::string& section, const std::string& key, T& target) {
  if (auto v = get<T>(root, section, key)) target = *v;
}

std::vector<bo::Solver> parse_solver_list(const std::string& text) {
  std::vector<bo::Solver> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      const bo::Solver s = bo::parse_solver(item);
      if (std::find(out.begin(), out.end(), s) != out.end())
        throw ConfigError("case.solvers", "duplicate solver '" + item + "'");
      out.push_back(s);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("case.solvers", e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------- io helpers

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j.at(static_cast<std::size_t>(i)).size()) != cols)
      throw Error("ragged matrix in record");
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = j.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp + "'");
    out << text;
    if (!out.flush()) throw Error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

json header(const std::string& kind) { return json{{"format", kFormatTag}, {"kind", kind}}; }

void check_header(const std::string& line, const std::string& kind, const std::string& path) {
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception&) {
    throw Error("'" + path + "' has no " + std::string(kFormatTag) + " header");
  }
  if (h.value("format", "") != kFormatTag || h.value("kind", "") != kind)
    throw Error("'" + path + "' is not a " + std::string(kFormatTag) + " " + kind + " file");
}

}  // namespace

void CaseStudyConfig::validate() const {
  if (id.empty()) throw ConfigError("case.id", "must not be empty");
  const auto& ids = bench::benchmark_ids();
  if (std::find(ids.begin(), ids.end(), benchmark) == ids.end())
    throw ConfigError("case.benchmark", "unknown benchmark '" + benchmark + "'");
  if (n_initial < 1) throw ConfigError("case.n_initial", "must be >= 1");
  if (n_experiments < 1) throw ConfigError("case.n_experiments", "must be >= 1");
  if (runs_per_experiment < 1) throw ConfigError("case.runs_per_experiment", "must be >= 1");
  if (solvers.empty()) throw ConfigError("case.solvers", "must list at least one solver");
  if (const auto* f = std::get_if<acq::FixedKappa>(&policy)) {
    if (!(f->kappa >= 0.0)) throw ConfigError("kappa.value", "must be >= 0");
  } else if (const auto* s = std::get_if<acq::ScheduleS>(&policy)) {
    if (!(s->M >= 1.0)) throw ConfigError("kappa.M", "must be >= 1");
    if (!(s->delta > 0.0 && s->delta < 1.0)) throw ConfigError("kappa.delta", "must lie in (0, 1)");
    if (!(s->scale > 0.0)) throw ConfigError("kappa.scale", "must be > 0");
  } else if (std::get<acq::ScheduleK>(policy).dims < 1) {
    throw ConfigError("kappa.dims", "must be >= 1");
  }
  acq::validate(policy);
  tc.validate();
  if (!(bnb.eps_r > 0.0)) throw ConfigError("BNB.eps_r", "must be > 0");
  if (!(bnb.eps_a > 0.0)) throw ConfigError("BNB.eps_a", "must be > 0");
  if (!(bnb.time_limit_s > 0.0)) throw ConfigError("BNB.time_limit", "must be > 0");
  if (bnb.node_cap < 1) throw ConfigError("BNB.node_cap", "must be >= 1");
  if (ims_restarts < 1) throw ConfigError("IMS.restarts", "must be >= 1");
  if (bench_options.success_tol && !(*bench_options.success_tol > 0.0))
    throw ConfigError("case.success_tol", "must be > 0");
}

CaseStudyConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  for (const auto& [section, body] : root) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError(section, "key outside any section");
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, value] : body)
      if (it->second.count(key) == 0) throw ConfigError(section + "." + key, "unknown key");
  }

  CaseStudyConfig c;
  assign(root, "case", "id", c.id);
  assign(root, "case", "benchmark", c.benchmark);
  assign(root, "case", "n_initial", c.n_initial);
  assign(root, "case", "n_experiments", c.n_experiments);
  assign(root, "case", "runs_per_experiment", c.runs_per_experiment);
  if (auto s = get<std::string>(root, "case", "solvers")) c.solvers = parse_solver_list(*s);
  assign(root, "case", "master_seed", c.master_seed);
  assign(root, "case", "replicate_deterministic", c.replicate_deterministic);
  if (auto v = get<double>(root, "case", "success_tol")) c.bench_options.success_tol = *v;
  assign(root, "case", "gkls_seed", c.bench_options.gkls_seed);
  assign(root, "case", "gkls_vertex_value", c.bench_options.gkls_vertex_value);

  const std::string policy = get<std::string>(root, "kappa", "policy").value_or("fixed");
  if (policy == "fixed") {
    acq::FixedKappa p;
    assign(root, "kappa", "value", p.kappa);
    c.policy = p;
  } else if (policy == "schedule-s") {
    acq::ScheduleS p;
    assign(root, "kappa", "M", p.M);
    assign(root, "kappa", "delta", p.delta);
    assign(root, "kappa", "scale", p.scale);
    c.policy = p;
  } else if (policy == "schedule-k") {
    acq::ScheduleK p;
    try {
      p.dims = bench::benchmark_dims(c.benchmark);
    } catch (const Error&) {
      throw ConfigError("case.benchmark", "unknown benchmark '" + c.benchmark + "'");
    }
    assign(root, "kappa", "dims", p.dims);
    c.policy = p;
  } else {
    throw ConfigError("kappa.policy", "expected fixed, schedule-s or schedule-k");
  }

  assign(root, "tc", "eps_x1", c.tc.eps_x1);
  assign(root, "tc", "eps_x2", c.tc.eps_x2);
  assign(root, "tc", "eps_f_rel", c.tc.eps_f_rel);
  assign(root, "tc", "eps_f_abs", c.tc.eps_f_abs);
  assign(root, "tc", "max_iter", c.tc.max_iter);
  assign(root, "BNB", "eps_r", c.bnb.eps_r);
  assign(root, "BNB", "eps_a", c.bnb.eps_a);
  assign(root, "BNB", "time_limit", c.bnb.time_limit_s);
  assign(root, "BNB", "node_cap", c.bnb.node_cap);
  assign(root, "IMS", "restarts", c.ims_restarts);
  c.validate();
  return c;
}

CaseStudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in);
}

// ---------------------------------------------------------------- designs

DesignSet gen_designs(const bench::BenchmarkHandle& bench, int n, int n_experiments, std::uint64_t seed) {
  if (n < 1) throw ConfigError("n", "must be >= 1");
  if (n_experiments < 1) throw ConfigError("experiments", "must be >= 1");
  DesignSet set{bench.id, n, seed, {}};
  for (int e = 0; e < n_experiments; ++e) {
    Rng rng(derive_seed(seed, fnv1a64(bench.id), static_cast<std::uint64_t>(e), fnv1a64("design"), 0));
    set.designs.push_back(bench::latin_hypercube(n, bench.box, rng));
  }
  return set;
}

std::string designs_to_text(const DesignSet& set) {
  json h = header("designs");
  h["benchmark"] = set.benchmark;
  h["n"] = set.n;
  h["experiments"] = set.designs.size();
  h["seed"] = set.seed;
  std::string out = h.dump() + "\n";
  for (std::size_t e = 0; e < set.designs.size(); ++e)
    out += json{{"experiment", e}, {"x", matrix_to_json(set.designs[e])}}.dump() + "\n";
  return out;
}

DesignSet designs_from_text(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw Error("design file is empty");
  check_header(lines[0], "designs", "designs");
  const json h = json::parse(lines[0]);
  DesignSet set;
  set.benchmark = h.at("benchmark").get<std::string>();
  set.n = h.at("n").get<int>();
  set.seed = h.at("seed").get<std::uint64_t>();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const json j = json::parse(lines[i]);
    if (j.at("experiment").get<std::size_t>() != set.designs.size()) throw Error("design file out of order");
    set.designs.push_back(matrix_from_json(j.at("x")));
  }
  if (set.designs.size() != h.at("experiments").get<std::size_t>()) throw Error("design file is truncated");
  return set;
}

void write_designs(const std::string& path, const DesignSet& set) { write_file_atomic(path, designs_to_text(set)); }

DesignSet read_designs(const std::string& path) { return designs_from_text(read_file(path)); }

// ---------------------------------------------------------------- records

json record_to_json(const bo::RunRecord& r) {
  json iters = json::array();
  for (const bo::IterationRecord& it : r.iterations) {
    iters.push_back({{"t", it.t},
                     {"x", vector_to_json(it.x)},
                     {"f", it.f},
                     {"kappa", it.kappa},
                     {"acq", it.acquisition},
                     {"status", it.inner_status},
                     {"work", it.inner_work},
                     {"clause", bo::clause_name(it.clause)}});
  }
  return json{{"case", r.case_study_id},
              {"benchmark", r.benchmark_id},
              {"f_star", r.f_star},
              {"dataset", r.experiment_id},
              {"run", r.run_index},
              {"solver", bo::solver_tag(r.solver)},
              {"replicated", r.replicated},
              {"initial_x", matrix_to_json(r.initial_x)},
              {"initial_f", vector_to_json(r.initial_f)},
              {"iterations", iters},
              {"terminated", r.terminated},
              {"clause", bo::clause_name(r.clause)},
              {"iterations_to_termination", r.iterations_to_termination},
              {"best_x", vector_to_json(r.best_x)},
              {"best_f", r.best_f},
              {"success", r.success},
              {"abort_reason", r.abort_reason}};
}

bo::RunRecord record_from_json(const json& j) {
  bo::RunRecord r;
  r.case_study_id = j.at("case").get<std::string>();
  r.benchmark_id = j.at("benchmark").get<std::string>();
  r.f_star = j.at("f_star").get<double>();
  r.experiment_id = j.at("dataset").get<int>();
  r.run_index = j.at("run").get<int>();
  r.solver = bo::parse_solver(j.at("solver").get<std::string>());
  r.replicated = j.at("replicated").get<bool>();
  r.initial_x = matrix_from_json(j.at("initial_x"));
  r.initial_f = vector_from_json(j.at("initial_f"));
  for (const json& it : j.at("iterations")) {
    bo::IterationRecord rec;
    rec.t = it.at("t").get<int>();
    rec.x = vector_from_json(it.at("x"));
    rec.f = it.at("f").get<double>();
    rec.kappa = it.at("kappa").get<double>();
    rec.acquisition = it.at("acq").get<double>();
    rec.inner_status = it.at("status").get<std::string>();
    rec.inner_work = it.at("work").get<long>();
    rec.clause = bo::parse_clause(it.at("clause").get<std::string>());
    r.iterations.push_back(std::move(rec));
  }
  r.terminated = j.at("terminated").get<bool>();
  r.clause = bo::parse_clause(j.at("clause").get<std::string>());
  r.iterations_to_termination = j.at("iterations_to_termination").get<int>();
  r.best_x = vector_from_json(j.at("best_x"));
  r.best_f = j.at("best_f").get<double>();
  r.success = j.at("success").get<bool>();
  r.abort_reason = j.at("abort_reason").get<std::string>();
  return r;
}

RecordKey key_of(const bo::RunRecord& r) {
  return {r.case_study_id, r.experiment_id, std::string(bo::solver_tag(r.solver)), r.run_index};
}

RunStore::RunStore(std::string path) : path_(std::move(path)) { load(); }

void RunStore::load() {
  if (!std::filesystem::exists(path_)) return;
  const std::vector<std::string> lines = split_lines(read_file(path_));
  if (lines.empty()) return;
  check_header(lines[0], "run-store", path_);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::exception&) {
      if (i + 1 == lines.size()) break;  // torn final append
      throw Error("'" + path_ + "' line " + std::to_string(i + 1) + " is corrupt");
    }
    const bo::RunRecord r = record_from_json(j);
    if (!lines_.emplace(key_of(r), j.dump()).second)
      throw Error("'" + path_ + "' holds a duplicate record key");
  }
}

bool RunStore::contains(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  return lines_.count(key) > 0;
}

std::optional<bo::RunRecord> RunStore::find(const RecordKey& key) const {
  std::lock_guard lock(mutex_);
  const auto it = lines_.find(key);
  if (it == lines_.end()) return std::nullopt;
  return record_from_json(json::parse(it->second));
}

void RunStore::append(const bo::RunRecord& record) {
  const std::string line = record_to_json(record).dump();
  std::lock_guard lock(mutex_);
  const RecordKey key = key_of(record);
  if (lines_.count(key) > 0) throw Error("duplicate record key");
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot append to '" + path_ + "'");
  if (fresh) out << header("run-store").dump() << '\n';
  out << line << '\n';
  out.flush();
  if (!out) throw Error("append failed for '" + path_ + "'");
  lines_.emplace(key, line);
}

std::vector<bo::RunRecord> RunStore::records() const {
  std::lock_guard lock(mutex_);
  std::vector<bo::RunRecord> out;
  out.reserve(lines_.size());
  for (const auto& [key, line] : lines_) out.push_back(record_from_json(json::parse(line)));
  return out;
}

void RunStore::canonicalize() {
  std::lock_guard lock(mutex_);
  std::string text = header("run-store").dump() + "\n";
  for (const auto& [key, line] : lines_) text += line + "\n";
  write_file_atomic(path_, text);
}

std::size_t RunStore::size() const {
  std::lock_guard lock(mutex_);
  return lines_.size();
}

std::vector<bo::RunRecord> read_store(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("store '" + path + "' does not exist");
  return RunStore(path).records();
}

// ---------------------------------------------------------------- execution

std::uint64_t run_seed(const CaseStudyConfig& cfg, int dataset, bo::Solver solver, int run) {
  return derive_seed(cfg.master_seed, fnv1a64(cfg.id), static_cast<std::uint64_t>(dataset),
                     fnv1a64(bo::solver_tag(solver)), static_cast<std::uint64_t>(run));
}

RunSummary run_case_study(const CaseStudyConfig& cfg, const DesignSet& designs, const std::string& store_path,
                          int workers, std::optional<int> max_tasks) {
  cfg.validate();
  if (designs.benchmark != cfg.benchmark)
    throw ConfigError("case.benchmark", "designs were generated for '" + designs.benchmark + "'");
  if (designs.n != cfg.n_initial)
    throw ConfigError("case.n_initial", "designs hold " + std::to_string(designs.n) + " points per experiment");
  if (static_cast<int>(designs.designs.size()) < cfg.n_experiments)
    throw ConfigError("case.n_experiments", "designs hold only " + std::to_string(designs.designs.size()) +
                                                " experiments");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");

  const bench::BenchmarkHandle bench = bench::make_benchmark(cfg.benchmark, cfg.bench_options);
  RunStore store(store_path);

  struct Task {
    int dataset;
    bo::Solver solver;
    int run;
  };
  std::vector<Task> tasks;
  RunSummary summary;
  for (int e = 0; e < cfg.n_experiments; ++e) {
    for (bo::Solver s : cfg.solvers) {
      const bool once = cfg.replicate_deterministic && bo::is_deterministic(s);
      const int runs = once ? 1 : cfg.runs_per_experiment;
      for (int r = 0; r < runs; ++r) {
        if (store.contains({cfg.id, e, std::string(bo::solver_tag(s)), r})) ++summary.skipped;
        else tasks.push_back({e, s, r});
      }
    }
  }

  const std::size_t limit =
      max_tasks ? std::min(tasks.size(), static_cast<std::size_t>(std::max(0, *max_tasks))) : tasks.size();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= limit) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      try {
        const Task& t = tasks[i];
        bo::RunOptions opt;
        opt.solver = t.solver;
        opt.policy = cfg.policy;
        opt.tc = cfg.tc;
        opt.bnb = cfg.bnb;
        opt.ims_restarts = cfg.ims_restarts;
        opt.case_study_id = cfg.id;
        opt.experiment_id = t.dataset;
        opt.run_index = t.run;
        Rng rng(run_seed(cfg, t.dataset, t.solver, t.run));
        store.append(bo::run_bo(bench, designs.designs[static_cast<std::size_t>(t.dataset)], opt, rng));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int width = std::max(1, std::min<int>(workers, static_cast<int>(limit)));
  std::vector<std::thread> pool;
  for (int w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  summary.executed = static_cast<int>(limit);
  if (limit < tasks.size()) {
    summary.interrupted = true;
    return summary;
  }

  if (cfg.replicate_deterministic) {
    for (int e = 0; e < cfg.n_experiments; ++e) {
      for (bo::Solver s : cfg.solvers) {
        if (!bo::is_deterministic(s)) continue;
        const std::string tag(bo::solver_tag(s));
        const auto source = store.find({cfg.id, e, tag, 0});
        if (!source) throw Error("missing deterministic source record");
        for (int r = 1; r < cfg.runs_per_experiment; ++r) {
          if (store.contains({cfg.id, e, tag, r})) continue;
          bo::RunRecord copy = *source;
          copy.run_index = r;
          copy.replicated = true;
          store.append(copy);
          ++summary.replicated;
        }
      }
    }
  }
  store.canonicalize();
  return summary;
}

// ---------------------------------------------------------------- analysis

namespace {

json absent(const std::string& reason) { return json{{"absent", reason}}; }

json summary_json(const std::map<std::string, stats::IterationSummary>& m) {
  json out = json::object();
  for (const auto& [s, v] : m)
    out[s] = {{"count", v.count}, {"mean", v.mean}, {"median", v.median}, {"std", v.std}};
  return out;
}

}  // namespace

json analyze(const std::vector<bo::RunRecord>& records, const AnalyzeOptions& options) {
  json report = header("report");
  if (records.empty()) {
    report["absent"] = "no run records";
    return report;
  }

  std::set<std::string> cases, benchmarks;
  double f_star = records.front().f_star;
  for (const bo::RunRecord& r : records) {
    cases.insert(r.case_study_id);
    benchmarks.insert(r.benchmark_id);
    f_star = std::min(f_star, r.f_star);
  }
  report["case_studies"] = cases;
  report["benchmarks"] = benchmarks;
  report["f_star"] = f_star;
  report["n_records"] = records.size();

  const stats::SuccessTable table = stats::build_success_table(records);
  report["solvers"] = table.solvers;
  {
    json rows = json::array();
    for (const auto& [key, c] : table.cells)
      rows.push_back({{"dataset", key.first},
                      {"solver", key.second},
                      {"n_runs", c.n_runs},
                      {"n_success", c.n_success},
                      {"p_hat", c.p_hat()}});
    json overall = json::object();
    json degenerate = json::object();
    for (const std::string& s : table.solvers) {
      overall[s] = table.overall(s);
      degenerate[s] = stats::rows_are_degenerate(table, s);
    }
    report["success_table"] = {
        {"datasets", table.datasets}, {"rows", rows}, {"overall", overall}, {"rows_degenerate", degenerate}};
  }

  const std::vector<int> joint = stats::joint_success_experiments(records);
  report["iteration_stats"] = {{"joint_success_experiments", joint},
                               {"successful_joint", summary_json(stats::iteration_stats(records, true))},
                               {"all_runs", summary_json(stats::iteration_stats(records, false))}};

  const std::string reference = std::find(table.solvers.begin(), table.solvers.end(), "BNB") != table.solvers.end()
                                    ? std::string("BNB")
                                    : table.solvers.front();
  std::vector<std::string> others;
  for (const std::string& s : table.solvers)
    if (s != reference) others.push_back(s);

  if (others.empty()) {
    report["paired_t_tests"] = absent("fewer than two solvers");
    report["cmle"] = absent("fewer than two solvers");
  } else {
    json tests = json::array();
    json fits = json::array();
    for (const std::string& s : others) {
      const stats::PairedMeans pm = stats::paired_iteration_means(records, s, reference);
      json entry{{"solver", s}, {"reference", reference}, {"experiments", pm.experiments},
                 {"alternative", "mean iterations of solver exceed the reference"}};
      if (pm.a.size() < 2) {
        entry["absent"] = "fewer than two joint-success experiments";
      } else {
        const stats::TTest t = stats::paired_t_one_sided(pm.a, pm.b);
        entry["t"] = t.t;
        entry["p"] = t.p;
        entry["df"] = t.df;
        entry["zero_variance"] = t.zero_variance;
      }
      tests.push_back(entry);

      json fit{{"solver", s}, {"reference", reference}};
      try {
        const stats::CmleFit f = stats::cmle_fit(table, s, reference);
        fit["alpha_hat"] = f.alpha_hat;
        fit["odds_ratio"] = std::exp(f.alpha_hat);
        fit["se"] = f.se;
        fit["wald_z"] = f.wald_z;
        fit["wald_p"] = f.wald_p;
        fit["converged"] = f.converged;
        fit["informative_datasets"] = f.informative_datasets;
      } catch (const AllDegenerate& e) {
        fit["converged"] = false;
        fit["absent"] = e.what();
      }
      fits.push_back(fit);
    }
    report["paired_t_tests"] = tests;
    json cmle{{"pairwise_wald", fits}};
    try {
      const stats::JointTest jt = stats::joint_lr_test(table, reference, others);
      cmle["joint_likelihood_ratio"] = {{"reference", reference}, {"solvers", jt.solvers},
                                        {"log_odds", jt.log_odds},  {"statistic", jt.lr_statistic},
                                        {"df", jt.df},              {"p_value", jt.p_value},
                                        {"converged", jt.converged}};
    } catch (const AllDegenerate& e) {
      cmle["joint_likelihood_ratio"] = absent(e.what());
    }
    report["cmle"] = cmle;
  }

  const int half = std::max(1, static_cast<int>(table.datasets.size()) / 2);
  try {
    const stats::MinimaxQ1 q1 = stats::minimax_q1(table, table.solvers, half);
    const stats::MinimaxQ2 q2 = stats::minimax_q2(table, table.solvers, half, options.seed);
    json q2_per_solver = json::object();
    for (const std::string& s : table.solvers) {
      double sum = 0.0;
      for (int d : q2.subset) sum += table.cell(d, s)->p_hat();
      q2_per_solver[s] = sum / static_cast<double>(q2.subset.size());
    }
    report["minimax"] = {{"half_size", half},
                         {"q1", {{"value", q1.value}, {"worst_subset", q1.worst_subset}, {"best_solver", q1.best_solver}}},
                         {"q2",
                          {{"subset", q2.subset},
                           {"value", q2.value},
                           {"per_solver", q2_per_solver},
                           {"approximate", q2.approximate}}}};
  } catch (const UnequalRunCounts& e) {
    report["minimax"] = absent(e.what());
  }

  int max_iter = 1;
  for (const bo::RunRecord& r : records) max_iter = std::max(max_iter, r.iterations_to_termination);
  std::vector<int> caps;
  for (int c = 1; c <= max_iter; ++c) caps.push_back(c);
  json curves = json::object();
  for (const auto& [s, pts] : stats::success_probability_vs_cap(records, caps)) {
    std::vector<double> p;
    for (const stats::CapPoint& pt : pts) p.push_back(pt.probability);
    curves[s] = p;
  }
  report["cap_curves"] = {{"caps", caps}, {"probability", curves}};

  json final_regret = json::object();
  const std::vector<stats::RegretRow> regret = stats::regret_curves(records, f_star);
  for (const stats::RegretRow& row : regret)
    final_regret[row.solver] = {{"iteration", row.iteration}, {"mean_regret", row.mean_regret},
                                {"std_regret", row.std_regret}};
  report["final_regret"] = final_regret;
  return report;
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

}  // namespace bolab::harness
