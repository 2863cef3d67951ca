#include "hiermech/harness.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hiermech/jointads.hpp"

namespace hiermech {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(fmt::format("short write to {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

namespace {

const std::set<std::string> kAlgorithms = {"hier-mech", "flat-hedge", "uniform-random"};
const std::set<std::string> kAdversaries = {"stationary", "drifting-rectangle",
                                            "switching-mixture"};
const std::set<std::string> kProblems = {"bilateral-trade", "joint-ads"};

std::string format_double(double v) { return fmt::format("{}", v); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (const char c : line) {
    if (quoted) {
      if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(fmt::format("bad number '{}'", s));
  return v;
}

std::int64_t parse_i64(const std::string& s) {
  std::size_t pos = 0;
  const std::int64_t v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument(fmt::format("bad integer '{}'", s));
  return v;
}

int worker_count(int replicates) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("HIERMECH_THREADS")) {
    try {
      workers = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw std::invalid_argument("HIERMECH_THREADS must be a positive integer");
    }
  }
  return std::min(workers, std::max(1, replicates));
}

}  // namespace

int AlgorithmSpec::resolved_level(int rounds) const {
  if (name == "hier-mech") {
    return height.value_or(HierMechLearner::default_height(rounds));
  }
  return level.value_or(HierMechLearner::default_height(rounds));
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "problem",    "rounds",          "replicates", "sigma",    "master_seed",
      "adversary",  "benchmark_level", "algorithms", "out_dir",  "force_large"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKeys.count(key)) {
      throw std::invalid_argument(fmt::format("unknown config key '{}'", key));
    }
  }
  ExperimentConfig cfg;
  cfg.problem = j.value("problem", cfg.problem);
  cfg.rounds = j.value("rounds", cfg.rounds);
  cfg.replicates = j.value("replicates", cfg.replicates);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.adversary_kind = j.value("adversary", cfg.adversary_kind);
  cfg.benchmark_level = j.value("benchmark_level", cfg.benchmark_level);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.force_large = j.value("force_large", cfg.force_large);
  if (j.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : j.at("algorithms")) {
      AlgorithmSpec spec;
      spec.name = a.at("name").get<std::string>();
      if (a.contains("height")) spec.height = a.at("height").get<int>();
      if (a.contains("level")) spec.level = a.at("level").get<int>();
      for (const auto& [key, value] : a.items()) {
        (void)value;
        if (key != "name" && key != "height" && key != "level") {
          throw std::invalid_argument(fmt::format("unknown algorithm key '{}'", key));
        }
      }
      cfg.algorithms.push_back(std::move(spec));
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& a : algorithms) {
    nlohmann::json e;
    e["name"] = a.name;
    if (a.height) e["height"] = *a.height;
    if (a.level) e["level"] = *a.level;
    algos.push_back(e);
  }
  return nlohmann::json{{"problem", problem},
                        {"rounds", rounds},
                        {"replicates", replicates},
                        {"sigma", sigma},
                        {"master_seed", master_seed},
                        {"adversary", adversary_kind},
                        {"benchmark_level", benchmark_level},
                        {"algorithms", algos},
                        {"out_dir", out_dir},
                        {"force_large", force_large}};
}

void ExperimentConfig::validate() const {
  if (!kProblems.count(problem)) {
    throw std::invalid_argument(fmt::format("unknown problem '{}'", problem));
  }
  if (rounds < 1) throw std::invalid_argument("rounds must be positive");
  if (replicates < 1) throw std::invalid_argument("replicates must be positive");
  if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("sigma must be in (0, 1]");
  if (!kAdversaries.count(adversary_kind)) {
    throw std::invalid_argument(fmt::format("unknown adversary '{}'", adversary_kind));
  }
  if (benchmark_level < 0 || benchmark_level > 12) {
    throw std::invalid_argument("benchmark_level must be in [0, 12]");
  }
  if (algorithms.empty()) throw std::invalid_argument("need at least one algorithm");
  std::set<std::string> seen;
  for (const auto& a : algorithms) {
    if (!kAlgorithms.count(a.name)) {
      throw std::invalid_argument(fmt::format("unknown algorithm '{}'", a.name));
    }
    if (!seen.insert(a.name).second) {
      throw std::invalid_argument(fmt::format("duplicate algorithm '{}'", a.name));
    }
    if (a.name == "hier-mech" && a.level) {
      throw std::invalid_argument("hier-mech takes 'height', not 'level'");
    }
    if (a.name != "hier-mech" && a.height) {
      throw std::invalid_argument(fmt::format("{} takes 'level', not 'height'", a.name));
    }
    const int lvl = a.resolved_level(rounds);
    if (lvl > 3) {
      throw std::invalid_argument(fmt::format(
          "algorithm '{}' resolves to mechanism level {}, beyond the materializable "
          "limit 3; set an explicit height/level",
          a.name, lvl));
    }
    if (lvl > benchmark_level) {
      throw std::invalid_argument(fmt::format(
          "benchmark_level {} is below algorithm '{}' mechanism level {}", benchmark_level,
          a.name, lvl));
    }
    if (problem == "joint-ads" && lvl < 1) {
      throw std::invalid_argument("joint-ads needs mechanism level >= 1");
    }
  }
  if (problem == "joint-ads" && benchmark_level < 1) {
    throw std::invalid_argument("joint-ads needs benchmark_level >= 1");
  }
}

namespace {

struct RunContext {
  const ExperimentConfig& cfg;
  AdversarySequence sequence;  // the problem-space sequence (ads space for joint-ads)
  double sigma_certified = 1.0;
  // Smoothness of the valuations the trade learners see: equals
  // sigma_certified except for joint-ads, where the stream compresses
  // through f and this drops to a quarter.
  double sigma_problem = 1.0;
  std::map<int, std::shared_ptr<const MechanismTree>> trees;
};

std::unique_ptr<Learner> make_learner(const AlgorithmSpec& spec, const RunContext& ctx,
                                      std::uint64_t seed) {
  const auto& cfg = ctx.cfg;
  if (spec.name == "hier-mech") {
    const int h = spec.resolved_level(cfg.rounds);
    return std::make_unique<HierMechLearner>(cfg.rounds, h, seed, cfg.force_large,
                                             ctx.trees.at(h));
  }
  if (spec.name == "flat-hedge") {
    return std::make_unique<FlatHedgeLearner>(spec.resolved_level(cfg.rounds), cfg.rounds, seed);
  }
  return std::make_unique<UniformRandomLearner>(spec.resolved_level(cfg.rounds), seed);
}

std::string valuations_csv(const ExperimentConfig& cfg, int replicate, std::uint64_t seed,
                           const std::vector<Valuation>& vals, bool joint) {
  std::string out = fmt::format("# problem={} kind={} sigma={} seed={} rounds={} replicate={}\n",
                                cfg.problem, cfg.adversary_kind, format_double(cfg.sigma), seed,
                                cfg.rounds, replicate);
  out += joint ? "t,v1,v2\n" : "t,vs,vb\n";
  for (std::size_t i = 0; i < vals.size(); ++i) {
    out += fmt::format("{},{},{}\n", i + 1, format_double(vals[i].vs), format_double(vals[i].vb));
  }
  return out;
}

std::string trace_csv(const ExperimentConfig& cfg, const std::string& algo,
                      const std::string& val_hash, const std::vector<RoundTrace>& trace) {
  std::string out =
      fmt::format("# algorithm={} problem={} valuations={}\n", algo, cfg.problem, val_hash);
  out += "t,mechanism,profit_num,profit_level,profit,cum_num,cum\n";
  for (const auto& row : trace) {
    out += fmt::format("{},\"{}\",{},{},{},{},{}\n", row.t, row.mechanism.serialize(),
                       row.profit.num, row.profit.level, format_double(row.profit.value()),
                       row.cumulative.num, format_double(row.cumulative.value()));
  }
  return out;
}

ReplicateResult run_replicate(const RunContext& ctx, int index) {
  const ExperimentConfig& cfg = ctx.cfg;
  const bool joint = cfg.problem == "joint-ads";
  ReplicateResult rep;
  rep.index = index;
  rep.seed = Rng::derive(cfg.master_seed, static_cast<std::uint64_t>(index));

  // Stream 0 re-seeds the adversary per replicate, stream 1 draws valuations,
  // streams 2+k drive the algorithms in config order.
  const AdversarySequence seq =
      make_sequence(cfg.adversary_kind, cfg.rounds, cfg.sigma, Rng::derive(rep.seed, 0));

  Rng val_rng(Rng::derive(rep.seed, 1));
  std::vector<Valuation> observed;  // joint-ads: (v1, v2) pairs
  std::vector<Valuation> trade_points;  // joint-ads: images under f, inside Q
  observed.reserve(static_cast<std::size_t>(cfg.rounds));
  trade_points.reserve(static_cast<std::size_t>(cfg.rounds));
  for (int t = 0; t < cfg.rounds; ++t) {
    const Valuation v = seq.rounds[static_cast<std::size_t>(t)].sample(val_rng);
    observed.push_back(v);
    trade_points.push_back(joint ? f_map(JointValuation{v.vs, v.vb}) : v);
  }

  rep.benchmark = best_in_hindsight(SampleSet{trade_points}, cfg.benchmark_level,
                                    ctx.sigma_problem, /*clip_to_quadrant=*/joint);
  if (joint) {
    // Posted-price revenue is twice the clipped trade profit.
    rep.benchmark.total.num *= 2;
    rep.benchmark.value = rep.benchmark.total.value();
    rep.benchmark.slack *= 2.0;
  }

  for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
    const AlgorithmSpec& spec = cfg.algorithms[k];
    std::unique_ptr<Learner> learner =
        make_learner(spec, ctx, Rng::derive(rep.seed, 2 + static_cast<std::uint64_t>(k)));
    std::vector<RoundTrace> trace;
    trace.reserve(static_cast<std::size_t>(cfg.rounds));
    std::int64_t cum_units = 0;
    if (joint) {
      JointAdsLearner wrapper(std::move(learner));
      for (int t = 0; t < cfg.rounds; ++t) {
        const JointValuation w{observed[static_cast<std::size_t>(t)].vs,
                               observed[static_cast<std::size_t>(t)].vb};
        const JointAdsMechanism& mech = wrapper.predict();
        const Dyadic revenue = mech.revenue_dyadic(w);
        cum_units += revenue.num;
        trace.push_back(RoundTrace{t + 1, mech.source(), trade_points[static_cast<std::size_t>(t)],
                                   revenue, Dyadic{cum_units, revenue.level}});
        wrapper.update(w);
      }
    } else {
      for (int t = 0; t < cfg.rounds; ++t) {
        const Valuation v = observed[static_cast<std::size_t>(t)];
        const GridMechanism& mech = learner->predict();
        const Dyadic profit = mech.profit_dyadic(v);
        cum_units += profit.num;
        trace.push_back(RoundTrace{t + 1, mech, v, profit, Dyadic{cum_units, profit.level}});
        learner->update(v);
      }
    }
    rep.traces.emplace_back(spec.name, std::move(trace));
  }

  rep.report = regret_report(rep.traces, rep.benchmark, ctx.sigma_certified);
  if (joint) {
    // Joint-ads annotations: revenue regret against the ads-side smoothness
    // carries constant 160 instead of 20, and the trade-problem floor does
    // not apply.
    rep.report.theorem_bound = 160.0 / ctx.sigma_certified *
                               std::sqrt(static_cast<double>(cfg.rounds)) *
                               std::log(static_cast<double>(cfg.rounds));
    rep.report.lower_bound_floor.reset();
  }

  const std::string val_file = valuations_csv(cfg, index, rep.seed, observed, joint);
  rep.valuations_hash = hash_hex(fnv1a(val_file));

  if (!cfg.out_dir.empty()) {
    const fs::path dir = fs::path(cfg.out_dir) / fmt::format("replicate_{}", index);
    write_file_atomic(dir / "valuations.csv", val_file);
    for (const auto& [name, trace] : rep.traces) {
      write_file_atomic(dir / fmt::format("trace_{}.csv", name),
                        trace_csv(cfg, name, rep.valuations_hash, trace));
    }
  }
  return rep;
}

nlohmann::json build_summary(const ExperimentConfig& cfg, const RunContext& ctx,
                             const std::vector<ReplicateResult>& reps) {
  nlohmann::json replicates = nlohmann::json::array();
  for (const auto& rep : reps) {
    nlohmann::json algos = nlohmann::json::array();
    for (const auto& entry : rep.report.entries) {
      algos.push_back({{"name", entry.algorithm},
                       {"final_cumulative", entry.final_cumulative},
                       {"regret", entry.regret}});
    }
    replicates.push_back(
        {{"index", rep.index},
         {"seed", rep.seed},
         {"valuations_hash", rep.valuations_hash},
         {"benchmark",
          {{"mechanism", rep.benchmark.best.serialize()},
           {"units", rep.benchmark.total.num},
           {"level", rep.benchmark.total.level},
           {"value", rep.benchmark.value},
           {"slack", rep.benchmark.slack}}},
         {"algorithms", algos}});
  }

  nlohmann::json aggregate;
  double bench_mean = 0.0;
  for (const auto& rep : reps) bench_mean += rep.benchmark.value;
  bench_mean /= static_cast<double>(reps.size());
  aggregate["benchmark_mean"] = bench_mean;
  nlohmann::json agg_algos = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
    const std::string& name = cfg.algorithms[k].name;
    double mean_final = 0.0, mean_regret = 0.0, max_regret = 0.0;
    nlohmann::json per_rep = nlohmann::json::array();
    std::vector<double> curve(static_cast<std::size_t>(cfg.rounds), 0.0);
    bool first = true;
    for (const auto& rep : reps) {
      const auto& entry = rep.report.entries[k];
      mean_final += entry.final_cumulative;
      mean_regret += entry.regret;
      max_regret = first ? entry.regret : std::max(max_regret, entry.regret);
      first = false;
      per_rep.push_back(entry.regret);
      const auto& trace = rep.traces[k].second;
      for (std::size_t t = 0; t < trace.size(); ++t) {
        curve[t] += trace[t].cumulative.value();
      }
    }
    mean_final /= static_cast<double>(reps.size());
    mean_regret /= static_cast<double>(reps.size());
    for (double& v : curve) v /= static_cast<double>(reps.size());
    agg_algos.push_back({{"name", name},
                         {"mean_final_cumulative", mean_final},
                         {"mean_regret", mean_regret},
                         {"max_regret", max_regret},
                         {"per_replicate_regret", per_rep},
                         {"mean_cumulative_curve", curve}});
  }
  aggregate["algorithms"] = agg_algos;

  const RegretReport& r0 = reps.front().report;
  nlohmann::json theory = {{"theorem_bound", r0.theorem_bound},
                           {"benchmark_slack", r0.benchmark_slack},
                           {"sigma", r0.sigma}};
  if (r0.lower_bound_floor) {
    theory["lower_bound_floor"] = *r0.lower_bound_floor;
  } else {
    theory["lower_bound_floor"] = nullptr;
  }

  return nlohmann::json{{"schema", "hiermech-experiment-v1"},
                        {"config", cfg.to_json()},
                        {"sigma_certified", ctx.sigma_certified},
                        {"sigma_problem", ctx.sigma_problem},
                        {"theory", theory},
                        {"replicates", replicates},
                        {"aggregate", aggregate}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunContext ctx{cfg, {}, 1.0, 1.0, {}};
  // The certified sigma is replicate-independent: rectangle dimensions depend
  // only on sigma, not on the seeded positions.
  ctx.sequence = make_sequence(cfg.adversary_kind, cfg.rounds, cfg.sigma, cfg.master_seed);
  ctx.sigma_certified = ctx.sequence.sigma;
  ctx.sigma_problem = ctx.sigma_certified;
  if (cfg.problem == "joint-ads") {
    double pushed_sigma = 1.0;
    for (const auto& d : ctx.sequence.rounds) {
      pushed_sigma = std::min(pushed_sigma, pushforward_f(d).certify_sigma());
    }
    ctx.sigma_problem = pushed_sigma;
  }
  for (const auto& spec : cfg.algorithms) {
    if (spec.name == "hier-mech") {
      const int h = spec.resolved_level(cfg.rounds);
      if (!ctx.trees.count(h)) {
        ctx.trees[h] = std::make_shared<const MechanismTree>(
            MechanismTree::build(h, cfg.force_large));
      }
    }
  }

  std::vector<ReplicateResult> reps(static_cast<std::size_t>(cfg.replicates));
  const int workers = worker_count(cfg.replicates);
  if (workers <= 1) {
    for (int i = 0; i < cfg.replicates; ++i) {
      reps[static_cast<std::size_t>(i)] = run_replicate(ctx, i);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const int i = next.fetch_add(1);
          if (i >= cfg.replicates) return;
          try {
            reps[static_cast<std::size_t>(i)] = run_replicate(ctx, i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.config = cfg;
  result.sigma_certified = ctx.sigma_certified;
  result.sigma_problem = ctx.sigma_problem;
  result.summary = build_summary(cfg, ctx, reps);
  result.replicates = std::move(reps);

  if (!cfg.out_dir.empty()) {
    write_file_atomic(fs::path(cfg.out_dir) / "config.json", cfg.to_json().dump(2) + "\n");
    write_file_atomic(fs::path(cfg.out_dir) / "summary.json", result.summary.dump(2) + "\n");
  }
  return result;
}

namespace {

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", p.string()));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json check_report(const std::string& dir) {
  const fs::path root(dir);
  nlohmann::json problems = nlohmann::json::array();
  auto complain = [&problems](std::string msg) { problems.push_back(std::move(msg)); };

  const ExperimentConfig cfg =
      ExperimentConfig::from_json(nlohmann::json::parse(read_file(root / "config.json")));
  const nlohmann::json summary = nlohmann::json::parse(read_file(root / "summary.json"));
  const bool joint = cfg.problem == "joint-ads";
  const double sigma_certified = summary.at("sigma_certified").get<double>();
  const double sigma_problem = joint ? sigma_certified / 4.0 : sigma_certified;
  if (summary.at("sigma_problem").get<double>() != sigma_problem) {
    complain("summary sigma_problem inconsistent with sigma_certified");
  }

  // Every replicate is rebuilt from its raw files; when the files are sound,
  // the whole summary is re-derived from the rebuilt replicates at the end
  // and must match the stored one field for field.
  std::vector<ReplicateResult> reps;
  for (int r = 0; r < cfg.replicates; ++r) {
    const fs::path rep_dir = root / fmt::format("replicate_{}", r);
    const std::uint64_t seed = Rng::derive(cfg.master_seed, static_cast<std::uint64_t>(r));
    const std::string val_content = read_file(rep_dir / "valuations.csv");
    const std::string val_hash = hash_hex(fnv1a(val_content));
    const nlohmann::json& rep_summary = summary.at("replicates").at(static_cast<std::size_t>(r));
    if (rep_summary.at("index").get<int>() != r ||
        rep_summary.at("seed").get<std::uint64_t>() != seed) {
      complain(fmt::format("replicate {}: summary index or seed mismatch", r));
    }
    if (rep_summary.at("valuations_hash").get<std::string>() != val_hash) {
      complain(fmt::format("replicate {}: valuations hash mismatch", r));
    }

    std::vector<Valuation> observed;
    {
      std::istringstream in(val_content);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) {
          complain(fmt::format("replicate {}: malformed valuation row '{}'", r, line));
          continue;
        }
        observed.push_back(Valuation{parse_double(fields[1]), parse_double(fields[2])});
      }
    }
    if (std::ssize(observed) != cfg.rounds) {
      complain(fmt::format("replicate {}: expected {} valuations, found {}", r, cfg.rounds,
                           observed.size()));
      continue;
    }
    // Values round-trip through the canonical shortest formatting, so the
    // file must be byte-identical to its own re-rendering.
    if (valuations_csv(cfg, r, seed, observed, joint) != val_content) {
      complain(fmt::format("replicate {}: valuations file deviates from canonical form", r));
    }

    std::vector<Valuation> trade_points;
    trade_points.reserve(observed.size());
    for (const Valuation& w : observed) {
      trade_points.push_back(joint ? f_map(JointValuation{w.vs, w.vb}) : w);
    }

    // Benchmark is recomputed from raw valuations whether or not the summary
    // carries it; a stored value must agree exactly.
    BenchmarkResult bench = best_in_hindsight(SampleSet{trade_points}, cfg.benchmark_level,
                                              sigma_problem, joint);
    if (joint) {
      bench.total.num *= 2;
      bench.value = bench.total.value();
      bench.slack *= 2.0;
    }
    if (rep_summary.contains("benchmark")) {
      const auto& bj = rep_summary.at("benchmark");
      if (bj.at("mechanism").get<std::string>() != bench.best.serialize()) {
        complain(fmt::format("replicate {}: benchmark mechanism mismatch", r));
      }
      if (bj.at("units").get<std::int64_t>() != bench.total.num ||
          bj.at("level").get<int>() != bench.total.level) {
        complain(fmt::format("replicate {}: benchmark value mismatch", r));
      }
      if (bj.at("value").get<double>() != bench.value ||
          bj.at("slack").get<double>() != bench.slack) {
        complain(fmt::format("replicate {}: benchmark annotation mismatch", r));
      }
    }

    ReplicateResult rep;
    rep.index = r;
    rep.seed = seed;
    rep.valuations_hash = val_hash;
    rep.benchmark = bench;

    for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
      const std::string& name = cfg.algorithms[k].name;
      const auto lines = read_lines(rep_dir / fmt::format("trace_{}.csv", name));
      if (lines.size() < 2 || lines[0].rfind("# algorithm=", 0) != 0) {
        complain(fmt::format("replicate {}: trace {} malformed header", r, name));
        continue;
      }
      if (lines[0].find(fmt::format("valuations={}", val_hash)) == std::string::npos) {
        complain(fmt::format("replicate {}: trace {} references wrong valuations", r, name));
      } else if (lines[0] !=
                 fmt::format("# algorithm={} problem={} valuations={}", name, cfg.problem,
                             val_hash)) {
        complain(fmt::format("replicate {}: trace {} header deviates from canonical form", r,
                             name));
      }
      if (lines[1] != "t,mechanism,profit_num,profit_level,profit,cum_num,cum") {
        complain(fmt::format("replicate {}: trace {} column header mismatch", r, name));
      }
      std::vector<RoundTrace> rebuilt_trace;
      rebuilt_trace.reserve(lines.size());
      std::int64_t cum_units = 0;
      int rows = 0;
      double final_cum = 0.0;
      bool row_problem = false;
      for (std::size_t li = 2; li < lines.size(); ++li) {
        const auto f = split_csv(lines[li]);
        if (f.size() != 7) {
          complain(fmt::format("replicate {}: trace {} row {} malformed", r, name, li));
          row_problem = true;
          break;
        }
        const int t = static_cast<int>(parse_i64(f[0]));
        const GridMechanism mech = GridMechanism::parse(f[1]);
        const std::int64_t num = parse_i64(f[2]);
        const int level = static_cast<int>(parse_i64(f[3]));
        const std::int64_t cum_num = parse_i64(f[5]);
        if (t != rows + 1) {
          complain(fmt::format("replicate {}: trace {} rounds out of order", r, name));
          row_problem = true;
          break;
        }
        const Valuation& w = observed[static_cast<std::size_t>(rows)];
        Dyadic expect;
        if (joint) {
          expect = JointAdsMechanism(mech).revenue_dyadic(JointValuation{w.vs, w.vb});
        } else {
          expect = mech.profit_dyadic(w);
        }
        if (expect.num != num || expect.level != level) {
          complain(fmt::format("replicate {}: trace {} round {} profit mismatch", r, name, t));
          row_problem = true;
          break;
        }
        cum_units += num;
        if (cum_units != cum_num) {
          complain(fmt::format("replicate {}: trace {} round {} cumulative mismatch", r, name, t));
          row_problem = true;
          break;
        }
        const Dyadic cum{cum_units, expect.level};
        // The derived decimal columns and all formatting are pinned too.
        if (lines[li] != fmt::format("{},\"{}\",{},{},{},{},{}", t, mech.serialize(), num, level,
                                     format_double(expect.value()), cum_num,
                                     format_double(cum.value()))) {
          complain(fmt::format("replicate {}: trace {} round {} deviates from canonical form", r,
                               name, t));
          row_problem = true;
          break;
        }
        rebuilt_trace.push_back(
            RoundTrace{t, mech, trade_points[static_cast<std::size_t>(rows)], expect, cum});
        final_cum = cum.value();
        ++rows;
      }
      if (row_problem) continue;
      if (rows != cfg.rounds) {
        complain(fmt::format("replicate {}: trace {} has {} rounds, expected {}", r, name, rows,
                             cfg.rounds));
        continue;
      }
      rep.traces.emplace_back(name, std::move(rebuilt_trace));
      const auto& aj = rep_summary.at("algorithms").at(k);
      if (aj.at("name").get<std::string>() != name) {
        complain(fmt::format("replicate {}: summary algorithm order mismatch", r));
        continue;
      }
      const double regret = bench.value - final_cum;
      if (aj.at("final_cumulative").get<double>() != final_cum ||
          aj.at("regret").get<double>() != regret) {
        complain(fmt::format("replicate {}: trace {} regret mismatch", r, name));
      }
    }

    if (std::ssize(rep.traces) == std::ssize(cfg.algorithms)) {
      rep.report = regret_report(rep.traces, rep.benchmark, sigma_certified);
      if (joint) {
        rep.report.theorem_bound = 160.0 / sigma_certified *
                                   std::sqrt(static_cast<double>(cfg.rounds)) *
                                   std::log(static_cast<double>(cfg.rounds));
        rep.report.lower_bound_floor.reset();
      }
      reps.push_back(std::move(rep));
    }
  }

  // Wholesale re-derivation: the stored summary must equal the one a run
  // would build from the rebuilt replicates, field for field.
  if (problems.empty() && std::ssize(reps) == cfg.replicates) {
    const RunContext ctx{cfg, AdversarySequence{}, sigma_certified, sigma_problem, {}};
    const nlohmann::json rebuilt = build_summary(cfg, ctx, reps);
    if (rebuilt != summary) {
      for (const auto& [key, value] : rebuilt.items()) {
        if (!summary.contains(key) || summary.at(key) != value) {
          complain(fmt::format("summary section '{}' does not match its re-derivation", key));
        }
      }
      for (const auto& [key, value] : summary.items()) {
        (void)value;
        if (!rebuilt.contains(key)) {
          complain(fmt::format("summary section '{}' is not produced by a run", key));
        }
      }
      if (problems.empty()) {
        complain("summary does not match its re-derivation");
      }
    }
  }

  return nlohmann::json{{"pass", problems.empty()},
                        {"replicates_checked", cfg.replicates},
                        {"problems", problems}};
}

}  // namespace hiermech
