#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "softnet/diffusion.hpp"
#include "softnet/io.hpp"
#include "softnet/kernel.hpp"
#include "softnet/model.hpp"
#include "softnet/ntk.hpp"
#include "softnet/rng.hpp"
#include "softnet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace softnet;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
  json cfg;
  fs::path out;
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point started;
  std::map<std::string, std::string> outputs;  // name -> content, written at end

  void add_output(const std::string& name, std::string content) {
    outputs.emplace(name, std::move(content));
  }

  void flush() {
    fs::create_directories(out);
    json manifest;
    manifest["config"] = cfg;
    manifest["seed"] = seed;
    manifest["version"] = kVersion;
    json hashes = json::object();
    for (const auto& [name, content] : outputs) {
      io::write_file_atomic(out / name, content);
      hashes[name] = io::content_hash_hex(content);
    }
    manifest["output_hashes"] = hashes;
    const auto elapsed = std::chrono::steady_clock::now() - started;
    manifest["wall_clock_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    io::write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
  }
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config root must be an object");
  return cfg;
}

void check_keys(const json& cfg, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown config field: " + key);
  }
}

template <typename T>
T require_field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ConfigError("missing required field: " + key);
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad type for field: " + key);
  }
}

template <typename T>
T field_or(const json& cfg, const std::string& key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad type for field: " + key);
  }
}

Dataset random_dataset(int n, int d1, int d2, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "data"));
  Matrix X(d1, n), Y(d2, n);
  for (int i = 0; i < n; ++i) {
    X.col(i) = rng.unit_ball(d1);
    Y.col(i) = rng.unit_ball(d2);
  }
  return Dataset(std::move(X), std::move(Y));
}

json check_json(const CheckReport& c) {
  return json{{"violations", c.violations},
              {"first_violation_step", c.first_violation_step},
              {"worst_margin", c.worst_margin}};
}

int run_train(RunContext& ctx, const std::string& mode) {
  check_keys(ctx.cfg, {"n", "d", "d2", "m", "sigma", "eta", "steps", "mode",
                       "seed", "delta", "eps", "C", "record_decomposition"});
  const int n = require_field<int>(ctx.cfg, "n");
  const int d = require_field<int>(ctx.cfg, "d");
  const int d2 = field_or(ctx.cfg, "d2", d);
  TrainConfig tc;
  tc.m = require_field<int>(ctx.cfg, "m");
  tc.sigma = field_or(ctx.cfg, "sigma", 0.04);
  tc.eta = field_or(ctx.cfg, "eta", 0.0);
  tc.max_steps = field_or(ctx.cfg, "steps", 200);
  tc.delta = field_or(ctx.cfg, "delta", 0.1);
  tc.eps = field_or(ctx.cfg, "eps", 1e-3);
  tc.C = field_or(ctx.cfg, "C", 10.0);
  tc.record_decomposition = field_or(ctx.cfg, "record_decomposition", false);
  tc.mode = mode == "practical" ? TrainMode::kPractical : TrainMode::kTheory;

  const Dataset data = random_dataset(n, d, d2, ctx.seed);
  TheoryParams params;
  const TrainTrace trace = train(data, tc, ctx.seed, &params);
  const InductionReport rep = monitor_induction(trace, params);

  json monitor;
  monitor["mode"] = mode;
  monitor["eta"] = trace.eta;
  monitor["lambda"] = params.lambda;
  monitor["B"] = params.B;
  monitor["D"] = rep.D;
  monitor["R"] = rep.R;
  monitor["D_lt_R"] = rep.D_lt_R;
  monitor["checks"] = json{{"drift", check_json(rep.drift)},
                           {"contraction", check_json(rep.contraction)},
                           {"step_ratio", check_json(rep.step_ratio)},
                           {"eta_grad", check_json(rep.eta_grad)},
                           {"grad_bound", check_json(rep.grad_bound)}};
  monitor["total_violations"] = rep.total_violations();
  monitor["aborted"] = trace.aborted;
  const bool violated = rep.total_violations() > 0;
  monitor["warning"] = violated;

  ctx.add_output("trace.csv", io::trace_csv(trace));
  ctx.add_output("monitor.json", monitor.dump(2) + "\n");
  ctx.flush();
  if (trace.aborted) return 3;
  if (violated && tc.mode == TrainMode::kTheory) return 1;
  return 0;
}

int run_kernel(RunContext& ctx) {
  check_keys(ctx.cfg, {"n", "d", "d2", "m", "sigma", "preset", "seed"});
  const int n = require_field<int>(ctx.cfg, "n");
  const int d = require_field<int>(ctx.cfg, "d");
  const int d2 = field_or(ctx.cfg, "d2", d);
  const int m = require_field<int>(ctx.cfg, "m");
  const double sigma = field_or(ctx.cfg, "sigma", 0.04);
  const std::string preset = field_or<std::string>(ctx.cfg, "preset", "random");
  if (preset != "random" && preset != "w_zero")
    throw ConfigError("preset must be random or w_zero");

  const Dataset data = random_dataset(n, d, d2, ctx.seed);
  NetworkState net =
      symmetric_init(m, d, d2, sigma, derive_seed(ctx.seed, "init"));
  if (preset == "w_zero") net.W.setZero();
  const GramMatrix G = gram(net, data);

  json report;
  report["n"] = n;
  report["d2"] = d2;
  report["m"] = m;
  report["preset"] = preset;
  report["lambda_min"] = min_eigenvalue(G);
  report["lambda_max"] = max_eigenvalue(G);

  std::string gram_csv;
  for (int r = 0; r < G.H.rows(); ++r) {
    for (int c = 0; c < G.H.cols(); ++c) {
      if (c) gram_csv += ',';
      gram_csv += io::format_double(G.H(r, c));
    }
    gram_csv += '\n';
  }
  ctx.add_output("gram.csv", gram_csv);
  ctx.add_output("kernel.json", report.dump(2) + "\n");
  ctx.flush();
  return 0;
}

int run_perturb(RunContext& ctx) {
  check_keys(ctx.cfg, {"n", "d", "m", "sigma", "R", "trials", "delta", "C",
                       "seed"});
  const int n = require_field<int>(ctx.cfg, "n");
  const int d = require_field<int>(ctx.cfg, "d");
  const int m = require_field<int>(ctx.cfg, "m");
  const double sigma = field_or(ctx.cfg, "sigma", 0.04);
  const double R = require_field<double>(ctx.cfg, "R");
  const int trials = require_field<int>(ctx.cfg, "trials");
  PerturbOptions opts;
  opts.delta = field_or(ctx.cfg, "delta", 0.1);
  opts.C = field_or(ctx.cfg, "C", 10.0);

  const PerturbReport rep =
      perturbation_experiment(n, d, m, sigma, R, trials, ctx.seed, opts);
  json summary;
  summary["B"] = rep.B;
  summary["frob_bound"] = rep.frob_bound;
  summary["entry_bound"] = rep.entry_bound;
  summary["trials"] = static_cast<int>(rep.trials.size());
  summary["frob_violations"] = rep.frob_violations;
  summary["entry_violations"] = rep.entry_violations;
  ctx.add_output("perturb.csv", io::perturb_csv(rep));
  ctx.add_output("summary.json", summary.dump(2) + "\n");
  ctx.flush();
  return rep.frob_violations + rep.entry_violations > 0 ? 1 : 0;
}

int run_audit(RunContext& ctx) {
  check_keys(ctx.cfg, {"n", "d", "m", "sigma", "delta", "R", "trials", "C",
                       "seed"});
  const int n = require_field<int>(ctx.cfg, "n");
  const int d = require_field<int>(ctx.cfg, "d");
  const int m = require_field<int>(ctx.cfg, "m");
  const double sigma = field_or(ctx.cfg, "sigma", 0.04);
  const double delta = field_or(ctx.cfg, "delta", 0.01);
  const double R = require_field<double>(ctx.cfg, "R");
  const int trials = require_field<int>(ctx.cfg, "trials");
  const double C = field_or(ctx.cfg, "C", 10.0);

  const AuditReport rep =
      bounds_audit(n, d, m, sigma, delta, R, trials, ctx.seed, C);
  bool failed = false;
  json parts = json::array();
  for (const AuditPart& part : rep.parts) {
    const double freq =
        part.trials > 0 ? static_cast<double>(part.violations) / part.trials
                        : 0.0;
    if (freq > delta) failed = true;
    parts.push_back(json{{"part", part.part},
                         {"violations", part.violations},
                         {"frequency", freq},
                         {"max_stat", part.max_stat},
                         {"bound", part.bound}});
  }
  json summary;
  summary["B"] = rep.B;
  summary["delta"] = delta;
  summary["trials"] = trials;
  summary["parts"] = parts;
  summary["passed"] = !failed;
  ctx.add_output("audit.csv", io::audit_csv(rep));
  ctx.add_output("summary.json", summary.dump(2) + "\n");
  ctx.flush();
  return failed ? 1 : 0;
}

int run_couple(RunContext& ctx) {
  check_keys(ctx.cfg, {"n", "d", "d2", "m_list", "steps", "test_points",
                       "sigma", "eta_scale", "seed"});
  const int n = require_field<int>(ctx.cfg, "n");
  const int d = require_field<int>(ctx.cfg, "d");
  const int d2 = field_or(ctx.cfg, "d2", d);
  const std::vector<int> m_list =
      require_field<std::vector<int>>(ctx.cfg, "m_list");
  const int steps = require_field<int>(ctx.cfg, "steps");
  const int n_te = field_or(ctx.cfg, "test_points", 8);
  CouplingOptions opts;
  opts.sigma = field_or(ctx.cfg, "sigma", 0.04);
  opts.eta_scale = field_or(ctx.cfg, "eta_scale", 0.5);

  const Dataset data = random_dataset(n, d, d2, ctx.seed);
  Rng rng(derive_seed(ctx.seed, "test-points"));
  Matrix test_points(d, n_te);
  for (int k = 0; k < n_te; ++k) test_points.col(k) = rng.unit_ball(d);

  const std::vector<CouplingTrace> traces =
      coupling_experiment(data, test_points, m_list, steps, ctx.seed, opts);

  json sweep = json::array();
  for (const CouplingTrace& trace : traces) {
    sweep.push_back(json{{"m", trace.m},
                         {"eta", trace.eta},
                         {"lambda", trace.lambda},
                         {"max_gap", trace.max_gap}});
    ctx.add_output("couple_m" + std::to_string(trace.m) + ".csv",
                   io::coupling_csv({trace}));
  }
  json summary;
  summary["sweep"] = sweep;
  ctx.add_output("summary.json", summary.dump(2) + "\n");
  ctx.flush();
  return 0;
}

int run_diffusion(RunContext& ctx) {
  check_keys(ctx.cfg, {"d", "n", "m", "T", "T0", "g", "s2", "steps", "eta",
                       "sigma", "mc_samples", "sample_steps", "sample_count",
                       "seed"});
  const int d = require_field<int>(ctx.cfg, "d");
  const int n = require_field<int>(ctx.cfg, "n");
  OUParams params;
  params.T = field_or(ctx.cfg, "T", 1.0);
  params.T0 = field_or(ctx.cfg, "T0", 0.01 * params.T);
  params.g_const = field_or(ctx.cfg, "g", 1.0);
  GaussianOracle oracle;
  oracle.s2 = field_or(ctx.cfg, "s2", 1.0);
  TrainConfig tc;
  tc.mode = TrainMode::kPractical;
  tc.m = require_field<int>(ctx.cfg, "m");
  tc.eta = require_field<double>(ctx.cfg, "eta");
  tc.max_steps = field_or(ctx.cfg, "steps", 2000);
  tc.sigma = field_or(ctx.cfg, "sigma", 0.04);
  const int mc = field_or(ctx.cfg, "mc_samples", 20000);
  const int sample_steps = field_or(ctx.cfg, "sample_steps", 500);
  const int sample_count = field_or(ctx.cfg, "sample_count", 10000);

  const double s = std::sqrt(oracle.s2);
  const P0Sampler p0 = [d, s](Rng& r) { return r.gaussian_vector(d, s); };
  const ScoreDataset dataset =
      build_dataset(p0, d, n, params, derive_seed(ctx.seed, "dataset"));
  const TrainTrace trace = train_score_net(dataset, tc, ctx.seed);

  const NetworkState& net = trace.final;
  const Scaler scaler = dataset.scaler;
  const ScoreFn trained = [&](double t, const Vector& x) {
    return denoiser_to_score(net, t, x, params, scaler);
  };
  const ScoreFn zero = [&](double t, const Vector& x) {
    const double mbar = mean_decay(t, params);
    return Vector((-x / (1.0 - mbar * mbar)).eval());
  };
  const ScoreFn oracle_fn = [&](double t, const Vector& x) {
    return gaussian_oracle_score(t, x, params, oracle);
  };
  const TimeWeight unit = [](double) { return 1.0; };
  const auto err_trained =
      score_error(trained, oracle, d, params, unit, mc, ctx.seed);
  const auto err_zero = score_error(zero, oracle, d, params, unit, mc, ctx.seed);
  const auto err_oracle =
      score_error(oracle_fn, oracle, d, params, unit, mc, ctx.seed);

  Rng srng(derive_seed(ctx.seed, "backward"));
  Vector mean = Vector::Zero(d), second = Vector::Zero(d);
  for (int j = 0; j < sample_count; ++j) {
    const Vector y = backward_sample(oracle_fn, d, params, sample_steps, srng);
    mean += y;
    second += y.cwiseProduct(y);
  }
  if (sample_count > 0) {
    mean /= sample_count;
    second /= sample_count;
  }

  json report;
  report["train_initial_loss"] = trace.steps.front().loss;
  report["train_final_loss"] = trace.steps.back().loss;
  report["score_error_trained"] =
      json{{"mean", err_trained.mean}, {"std_error", err_trained.std_error}};
  report["score_error_zero"] =
      json{{"mean", err_zero.mean}, {"std_error", err_zero.std_error}};
  report["score_error_oracle"] =
      json{{"mean", err_oracle.mean}, {"std_error", err_oracle.std_error}};
  json mean_j = json::array(), var_j = json::array();
  for (int k = 0; k < d; ++k) {
    mean_j.push_back(mean[k]);
    var_j.push_back(second[k] - mean[k] * mean[k]);
  }
  report["backward_mean"] = mean_j;
  report["backward_variance"] = var_j;

  ctx.add_output("dataset.csv", io::score_dataset_csv(dataset));
  ctx.add_output("trace.csv", io::trace_csv(trace));
  ctx.add_output("diffusion.json", report.dump(2) + "\n");
  ctx.flush();
  return trace.aborted ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softmax network NTK laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode = "theory";
  std::uint64_t seed = 0;
  bool seed_given = false;

  const std::vector<std::string> names = {"train",  "kernel", "perturb",
                                          "audit",  "couple", "diffusion"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path)->required();
    sub->add_option("--seed", seed)->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--out", out_dir);
    sub->add_option("--mode", mode)
        ->check(CLI::IsMember({"theory", "practical"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    RunContext ctx;
    ctx.started = std::chrono::steady_clock::now();
    ctx.cfg = load_config(config_path);
    ctx.out = out_dir;
    if (ctx.cfg.contains("mode") && !app.get_subcommands()
                                         .front()
                                         ->get_option("--mode")
                                         ->count())
      mode = field_or<std::string>(ctx.cfg, "mode", mode);
    if (mode != "theory" && mode != "practical")
      throw ConfigError("mode must be theory or practical");
    ctx.seed = seed_given ? seed
                          : field_or<std::uint64_t>(ctx.cfg, "seed", 0);

    if (sub == "train") return run_train(ctx, mode);
    if (sub == "kernel") return run_kernel(ctx);
    if (sub == "perturb") return run_perturb(ctx);
    if (sub == "audit") return run_audit(ctx);
    if (sub == "couple") return run_couple(ctx);
    if (sub == "diffusion") return run_diffusion(ctx);
    std::cerr << "unknown subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValueError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
