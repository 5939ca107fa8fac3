// psibench: command-line front end for the linpsi library.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linpsi/bench.hpp"
#include "linpsi/design.hpp"
#include "linpsi/errors.hpp"
#include "linpsi/gege.hpp"
#include "linpsi/pareto.hpp"

using namespace linpsi;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kPrecondition = 3 };

struct InstanceArgs {
  std::string path;
  std::string mode = "linearize";
  bool no_normalize = false;
  double sigma = 1.0;
  std::size_t h = 0;
  std::size_t d = 2;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--instance", path, "Instance CSV (f1..fh,y1..yd)");
    app->add_option("--mode", mode, "Instance model")->check(CLI::IsMember({"linearize", "raw"}));
    app->add_flag("--no-normalize", no_normalize, "Keep feature columns as given");
    app->add_option("--sigma", sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    app->add_option("--synth-h", h, "Synthetic family: base dimension");
    app->add_option("--synth-d", d, "Synthetic family: objectives");
    app->add_option("--synth-k", k, "Synthetic family: arms");
    app->add_option("--seed", seed, "Master seed");
  }

  bool synthetic() const { return path.empty(); }

  Instance build(std::size_t arms, std::vector<std::string>* warnings = nullptr) const {
    if (!synthetic()) {
      LoadOptions opt;
      opt.mode = mode == "raw" ? LoadMode::raw : LoadMode::linearize;
      opt.normalize = !no_normalize;
      opt.sigma = sigma;
      return load_instance(path, opt, warnings);
    }
    if (h == 0) throw CLI::ValidationError("instance", "give --instance or --synth-h");
    return make_synthetic_family(h, d, arms ? arms : (k ? k : h), seed, {sigma});
  }
};

std::vector<std::string> warnings;

std::vector<std::size_t> one_based(const ArmSet& s) {
  std::vector<std::size_t> out;
  for (auto a : s) out.push_back(a + 1);
  return out;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

json trace_json(const RunResult& r, bool confidence) {
  json rounds = json::array();
  for (const auto& t : r.trace) {
    json j;
    j["round"] = t.round;
    j["active"] = one_based(t.active);
    j["accepted"] = one_based(t.accepted);
    j["rejected"] = one_based(t.rejected);
    j["h_r"] = t.h_r;
    j["budget"] = t.budget;
    if (confidence) {
      j["eps_r"] = t.eps_r;
      j["delta_r"] = t.delta_r;
    }
    j["empirical_pareto"] = one_based(t.empirical_pareto);
    json g = json::array();
    for (double v : t.empirical_gap) g.push_back(num(v));
    j["empirical_gap"] = g;
    rounds.push_back(std::move(j));
  }
  json out;
  out["recommended"] = one_based(r.recommended);
  out["total_samples"] = r.total_samples;
  out["rounds"] = r.rounds;
  if (r.correct) out["correct"] = *r.correct;
  out["trace"] = rounds;
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw DataError("cannot write '" + path + "'");
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto set identification in multi-output linear bandits"};
  app.require_subcommand(1);

  // design
  auto* design = app.add_subcommand("design", "G-optimal design over a feature set");
  std::string features_path;
  DesignOptions dopt;
  Count round_n = 0;
  double kappa = 1.0 / 3.0;
  design->add_option("--features", features_path, "CSV of feature rows")->required();
  design->add_option("--tol", dopt.tol, "Tolerance on max leverage - h_S")->check(CLI::PositiveNumber);
  design->add_option("--max-iter", dopt.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  design->add_option("--round", round_n, "Round to this many pulls");
  design->add_option("--kappa", kappa, "Rounding precision in (0, 1/3]");

  // gaps
  auto* gaps = app.add_subcommand("gaps", "True gaps and complexity measures of an instance");
  InstanceArgs gaps_args;
  gaps_args.attach(gaps);

  // run-fb
  auto* run_fb = app.add_subcommand("run-fb", "One fixed-budget run with its trace");
  InstanceArgs fb_args;
  fb_args.attach(run_fb);
  Count budget = 0;
  std::string fb_algorithm = "gege";
  std::uint64_t fb_stream = 0;
  run_fb->add_option("--budget", budget, "Total budget T")->required();
  run_fb->add_option("--algorithm", fb_algorithm, "gege, uniform or gege_unstructured");
  run_fb->add_option("--stream", fb_stream, "Replication stream id");

  // run-fc
  auto* run_fc = app.add_subcommand("run-fc", "One fixed-confidence run with its trace");
  InstanceArgs fc_args;
  fc_args.attach(run_fc);
  double delta = 0.1;
  double epsilon = 0.0;
  std::string fc_algorithm = "gege";
  std::uint64_t fc_stream = 0;
  run_fc->add_option("--delta", delta, "Risk in (0, 1)");
  run_fc->add_option("--epsilon", epsilon, "Indifference margin, 0 for exact identification");
  run_fc->add_option("--algorithm", fc_algorithm, "gege or gege_unstructured");
  run_fc->add_option("--stream", fc_stream, "Replication stream id");

  // bench
  auto* bench = app.add_subcommand("bench", "Seeded replications over a sweep");
  InstanceArgs bench_args;
  bench_args.attach(bench);
  std::string bench_algorithms = "gege";
  std::string sweep_k;
  std::string sweep_budget;
  std::vector<double> deltas;
  Count bench_budget = 0;
  double bench_eps = 0.0;
  int reps = 1;
  int threads = 1;
  std::string out_path;
  std::string summary_path;
  std::string format = "csv";
  bool no_wall = false;
  bench->add_option("--algorithm", bench_algorithms, "Comma-separated algorithms");
  bench->add_option("--delta", deltas, "Risk(s) for fixed confidence")->delimiter(',');
  bench->add_option("--budget", bench_budget, "Budget for fixed budget");
  bench->add_option("--sweep-budget", sweep_budget, "Comma-separated budgets");
  bench->add_option("--sweep-k", sweep_k, "Comma-separated K values (synthetic family)");
  bench->add_option("--epsilon", bench_eps, "Indifference margin");
  bench->add_option("--reps", reps, "Replications per batch")->check(CLI::PositiveNumber);
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_option("--out", out_path, "Result file (default: stdout)");
  bench->add_option("--summary", summary_path, "Aggregate file (default: stderr)");
  bench->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  bench->add_flag("--no-wall", no_wall, "Leave the wall_ms column empty");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic-family instance as CSV");
  InstanceArgs synth_args;
  synth_args.attach(synth);
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*design) {
      std::ifstream in(features_path);
      if (!in) throw DataError("cannot open '" + features_path + "'");
      const Matrix x = parse_matrix(in);
      const SubspaceBasis basis = subspace_basis(x);
      const Matrix xt = transform_features(x, basis);
      json out;
      Design d;
      bool converged = true;
      try {
        d = g_optimal_design(xt, dopt);
      } catch (const DesignNotConverged& e) {
        d = e.best();
        converged = false;
      }
      out["h_S"] = basis.rank();
      out["weights"] = std::vector<double>(d.weights.data(), d.weights.data() + d.weights.size());
      out["value"] = d.value;
      out["iterations"] = d.iterations;
      out["converged"] = converged;
      if (round_n > 0) {
        const IntegerAllocation a = round_design(d, xt, round_n, kappa);
        out["counts"] = a.counts;
        out["rounded_value"] = a.value;
        out["bound"] = (1.0 + 6.0 * kappa) * static_cast<double>(basis.rank()) / static_cast<double>(round_n);
      }
      std::cout << out.dump(2) << '\n';
      return converged ? kOk : kPrecondition;
    }

    if (*gaps) {
      const Instance inst = gaps_args.build(0, &warnings);
      const GapProfile g = true_gaps(inst.means());
      const std::size_t h = std::min(subspace_basis(inst.features()).rank(), inst.arms());
      json out;
      out["K"] = inst.arms();
      out["h"] = h;
      out["d"] = inst.objectives();
      out["pareto"] = one_based(g.pareto_arms());
      json arms = json::array();
      for (std::size_t i = 0; i < inst.arms(); ++i) {
        json a;
        a["arm"] = i + 1;
        a["pareto"] = bool(g.pareto[i]);
        a["delta_star"] = num(g.delta_star[i]);
        if (g.pareto[i]) a["delta_opt"] = num(g.delta_opt[i]);
        a["gap"] = num(g.gap[i]);
        arms.push_back(std::move(a));
      }
      out["arms"] = arms;
      out["sorted_gaps"] = one_based(g.sorted_gaps);
      out["degenerate"] = g.degenerate;
      if (!g.degenerate && inst.arms() > 1) {
        const ComplexityMeasures c = complexities(g, h);
        out["H1"] = c.h1;
        out["H2"] = c.h2;
        out["H1_lin"] = c.h1_lin;
        out["H2_lin"] = c.h2_lin;
      }
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      std::cout << out.dump(2) << '\n';
      return kOk;
    }

    if (*run_fb || *run_fc) {
      const bool fc = run_fc->parsed();
      const InstanceArgs& args = fc ? fc_args : fb_args;
      const Instance inst = args.build(0, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      const Algorithm alg = parse_algorithm(fc ? fc_algorithm : fb_algorithm);
      const Instance view = alg == Algorithm::gege_unstructured ? unstructured(inst) : inst;
      RngStream rng(args.seed, fc ? fc_stream : fb_stream);
      RunResult r;
      if (fc) {
        if (alg == Algorithm::uniform) throw InvalidArgument("the uniform baseline needs a budget");
        r = gege_fixed_confidence(view, delta, rng, {epsilon});
      } else {
        r = alg == Algorithm::uniform ? uniform_fixed_budget(view, budget, rng)
                                      : gege_fixed_budget(view, budget, rng);
      }
      std::cout << trace_json(r, fc).dump(2) << '\n';
      return kOk;
    }

    if (*bench) {
      ExperimentConfig cfg;
      cfg.algorithms.clear();
      for (const auto& a : split_list(bench_algorithms)) cfg.algorithms.push_back(parse_algorithm(a));
      const bool fb = bench_budget > 0 || !sweep_budget.empty();
      if (fb == !deltas.empty()) {
        throw CLI::ValidationError("bench", "give exactly one of --delta or --budget/--sweep-budget");
      }
      cfg.setting = fb ? Setting::fixed_budget : Setting::fixed_confidence;
      if (fb) {
        if (bench_budget > 0) cfg.params.push_back(static_cast<double>(bench_budget));
        for (const auto& b : split_list(sweep_budget)) cfg.params.push_back(std::stod(b));
      } else {
        cfg.params = deltas;
      }
      if (!sweep_k.empty()) {
        if (!bench_args.synthetic()) {
          throw CLI::ValidationError("bench", "--sweep-k applies to the synthetic family only");
        }
        for (const auto& k : split_list(sweep_k)) cfg.instances.push_back(bench_args.build(std::stoul(k)));
      } else {
        cfg.instances.push_back(bench_args.build(0, &warnings));
      }
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
      cfg.epsilon = bench_eps;
      cfg.reps = reps;
      cfg.seed = bench_args.seed;
      cfg.threads = threads;
      const auto rows = run_benchmark(cfg);
      {
        std::ofstream file;
        std::ostream& out = output(out_path, file);
        if (format == "json") {
          write_results_json(out, rows, !no_wall);
        } else {
          write_results_csv(out, rows, !no_wall);
        }
      }
      const auto summary = aggregate(rows);
      if (summary_path.empty()) {
        write_summary_csv(std::cerr, summary);
      } else {
        std::ofstream file;
        std::ostream& out = output(summary_path, file);
        if (format == "json") {
          write_summary_json(out, summary);
        } else {
          write_summary_csv(out, summary);
        }
      }
      return kOk;
    }

    if (*synth) {
      const Instance inst = synth_args.build(0);
      std::ofstream file;
      write_instance(output(synth_out, file), inst);
      return kOk;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number in a list option\n";
    return kUsage;
  }
  return kOk;
}
