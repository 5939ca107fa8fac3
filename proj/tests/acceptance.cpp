// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Thresholds and sizes are fixed here; do not relax them.

#include <boost/math/distributions/binomial.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "helpers.hpp"
#include "linpsi/bench.hpp"
#include "linpsi/regression.hpp"

using namespace linpsi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_s <= 0 || secs < limit_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s C%d %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(),
              secs, in_time ? "" : ", over time limit");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared noiseless runs for criteria 1, 8 and 9.
struct NoiselessRun {
  GapProfile gaps;
  RunResult fc;
  RunResult fb;
  Matrix mu;
};

std::vector<NoiselessRun> noiseless_runs() {
  std::mt19937_64 gen(20240501);
  std::vector<NoiselessRun> runs;
  for (int i = 0; i < 100; ++i) {
    const Instance inst = testing::random_instance(gen, 0.0);
    RngStream r1(1, i), r2(2, i);
    NoiselessRun run{true_gaps(inst.means()), gege_fixed_confidence(inst, 0.1, r1),
                     gege_fixed_budget(inst, min_fixed_budget(inst), r2), inst.means().values()};
    runs.push_back(std::move(run));
  }
  return runs;
}

// Fixed-confidence runs on the synthetic family for criteria 5 and 8.
std::vector<RunResult> family_runs;
GapProfile family_gaps;

}  // namespace

int main() {
  std::vector<NoiselessRun> noiseless;

  criterion(1, "noiseless exactness (100 random instances, both variants)", 10.0, [&] {
    noiseless = noiseless_runs();
    int fc = 0, fb = 0;
    for (const auto& r : noiseless) {
      const ArmSet s = r.gaps.pareto_arms();
      fc += r.fc.recommended == s;
      fb += r.fb.recommended == s;
    }
    return Outcome{fc == 100 && fb == 100, fmt("fixed-confidence %d/100, fixed-budget %d/100", fc, fb)};
  });

  criterion(2, "Kiefer-Wolfowitz certificate (50 feature sets)", 30.0, [] {
    std::mt19937_64 gen(7001);
    std::normal_distribution<double> n(0.0, 1.0);
    int ok = 0, max_iter = 0;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const int hs = 1 + t % 8;
      const int rows = hs + int(gen() % unsigned(64 - hs + 1));
      Matrix a(rows, hs), b(hs, 8);
      for (int i = 0; i < rows; ++i)
        for (int c = 0; c < hs; ++c) a(i, c) = n(gen);
      for (int i = 0; i < hs; ++i)
        for (int c = 0; c < 8; ++c) b(i, c) = n(gen);
      const Matrix x = a * b;
      const SubspaceBasis basis = subspace_basis(x);
      const Design d = g_optimal_design(transform_features(x, basis));
      const double err = std::abs(d.value - double(basis.rank()));
      worst = std::max(worst, err);
      max_iter = std::max(max_iter, d.iterations);
      ok += basis.rank() == std::size_t(hs) && err <= 1e-3;
    }
    return Outcome{ok == 50, fmt("%d/50 within 1e-3 (worst %.2e, max %d iterations)", ok, worst, max_iter)};
  });

  criterion(3, "rounding certificate (50 design, N, kappa triples)", 30.0, [] {
    std::mt19937_64 gen(7002);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int ok = 0;
    double worst_ratio = 0.0;
    for (int t = 0; t < 50; ++t) {
      const int hs = 1 + t % 8;
      const int rows = hs + int(gen() % unsigned(64 - hs + 1));
      Matrix x(rows, hs);
      for (int i = 0; i < rows; ++i)
        for (int c = 0; c < hs; ++c) x(i, c) = n(gen);
      const double kappa = 0.02 + (1.0 / 3 - 0.02) * u(gen);
      const Count nmin = min_rounding_budget(hs, kappa);
      const Count budget = nmin + Count(u(gen) * double(nmin));
      Design d = g_optimal_design(x);
      if (t % 2) {  // a random design instead of the solved one
        for (int i = 0; i < rows; ++i) d.weights(i) = -std::log(1.0 - u(gen));
        d.weights /= d.weights.sum();
      }
      const IntegerAllocation a = round_design(d, x, budget, kappa);
      Vector s(rows);
      for (int i = 0; i < rows; ++i) s(i) = double(a.counts[i]);
      const double value = oracle::g_value(s, x);
      const double bound = (1 + 6 * kappa) * hs / double(budget);
      worst_ratio = std::max(worst_ratio, value / bound);
      ok += s.sum() == double(budget) && value <= bound * (1 + 1e-9);
    }
    return Outcome{ok == 50, fmt("%d/50 certified (max value/bound %.3f)", ok, worst_ratio)};
  });

  criterion(4, "least-squares covariance (50000 replications, h=2, d=2, N=20)", 60.0, [] {
    Matrix x(3, 2);
    x << 1, 0, 0, 1, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    Matrix theta(2, 2);
    theta << 0.3, -0.2, 0.8, 0.5;
    Matrix cov(2, 2);
    cov << 1.0, 0.5, 0.5, 2.0;
    const Instance inst = Instance::linear(x, theta, cov);
    std::vector<std::size_t> arms;
    for (int t = 0; t < 20; ++t) arms.push_back(t < 8 ? 0 : t < 16 ? 1 : 2);
    PullLog log;
    log.arm_ids = arms;
    log.x.resize(20, 2);
    log.y.resize(20, 2);
    for (int t = 0; t < 20; ++t) log.x.row(t) = x.row(Eigen::Index(arms[t]));
    const Matrix vdag = pseudo_inverse(info_matrix(log), subspace_basis(x));

    const int reps = 50000;
    std::vector<Matrix> acc(3, Matrix::Zero(2, 2));
    std::vector<Vector> sum(3, Vector::Zero(2));
    for (int s = 0; s < reps; ++s) {
      RngStream rng(4004, std::uint64_t(s));
      for (int t = 0; t < 20; ++t) log.y.row(t) = inst.sample(arms[t], rng).transpose();
      const Matrix pred = x * ols_estimate(log, vdag);
      for (int i = 0; i < 3; ++i) {
        const Vector p = pred.row(i).transpose();
        acc[i] += p * p.transpose();
        sum[i] += p;
      }
    }
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vector mean = sum[i] / reps;
      const Matrix emp = acc[i] / reps - mean * mean.transpose();
      const Matrix expect = x.row(i).dot(vdag * x.row(i).transpose()) * cov;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) worst = std::max(worst, std::abs(emp(a, b) / expect(a, b) - 1.0));
    }
    return Outcome{worst <= 0.10, fmt("max entrywise relative error %.4f (limit 0.10)", worst)};
  });

  criterion(5, "delta-correctness (h=8, d=2, K=20, delta=0.1, 200 runs)", 300.0, [] {
    const Instance inst = make_synthetic_family(8, 2, 20, 2024);
    family_gaps = true_gaps(inst.means());
    int wrong = 0;
    for (int s = 0; s < 200; ++s) {
      RngStream rng(5005, std::uint64_t(s));
      family_runs.push_back(gege_fixed_confidence(inst, 0.1, rng));
      wrong += !*family_runs.back().correct;
    }
    const double rate = wrong / 200.0;
    return Outcome{rate <= 0.12, fmt("error rate %.3f (limit 0.12)", rate)};
  });

  criterion(6, "sample complexity versus K (K = 16, 64, 128; delta=0.1)", 900.0, [] {
    ExperimentConfig cfg;
    cfg.setting = Setting::fixed_confidence;
    cfg.algorithms = {Algorithm::gege, Algorithm::gege_unstructured};
    for (std::size_t k : {16u, 64u, 128u}) cfg.instances.push_back(make_synthetic_family(8, 2, k, 6006));
    cfg.params = {0.1};
    cfg.reps = 50;
    cfg.seed = 6006;
    const auto summary = aggregate(run_benchmark(cfg));
    auto mean_of = [&](const std::string& alg, std::size_t k) {
      for (const auto& s : summary)
        if (s.algorithm == alg && s.k == k && s.failures == 0) return s.mean_samples;
      return std::numeric_limits<double>::quiet_NaN();
    };
    const double g16 = mean_of("gege", 16), g128 = mean_of("gege", 128);
    const double u16 = mean_of("gege_unstructured", 16), u128 = mean_of("gege_unstructured", 128);
    const double rs = g128 / g16, ru = u128 / u16;
    return Outcome{rs <= 1.5 && ru > 3.0,
                   fmt("structured %.0f -> %.0f (x%.2f, limit 1.5); unstructured %.0f -> %.0f (x%.2f, needs > 3); "
                       "K=64: %.0f / %.0f",
                       g16, g128, rs, u16, u128, ru, mean_of("gege", 64), mean_of("gege_unstructured", 64))};
  });

  criterion(7, "fixed budget beats uniform (K=64, T=1080, 500 paired runs)", 600.0, [] {
    const Instance inst = make_synthetic_family(8, 2, 64, 7007);
    const Count budget = Count(std::ceil(45.0 * 8 * std::log2(8.0)));
    int gege_err = 0, unif_err = 0, only_unif = 0, only_gege = 0;
    for (int s = 0; s < 500; ++s) {
      RngStream r1(7007, std::uint64_t(s)), r2(7007, std::uint64_t(s));
      const bool g = !*gege_fixed_budget(inst, budget, r1).correct;
      const bool u = !*uniform_fixed_budget(inst, budget, r2).correct;
      gege_err += g;
      unif_err += u;
      only_unif += u && !g;
      only_gege += g && !u;
    }
    // Exact one-sided test on discordant pairs.
    const int disc = only_unif + only_gege;
    double p = 1.0;
    if (disc > 0 && only_unif > 0) {
      boost::math::binomial_distribution<double> bin(disc, 0.5);
      p = boost::math::cdf(boost::math::complement(bin, only_unif - 1));
    }
    return Outcome{gege_err < unif_err && p < 0.01,
                   fmt("error rate gege %.3f vs uniform %.3f, discordant %d/%d, p = %.2e", gege_err / 500.0,
                       unif_err / 500.0, only_unif, only_gege, p)};
  });

  criterion(8, "round bound (noiseless: all; delta=0.1: >= 85%)", 0.0, [&] {
    int ok0 = 0;
    for (const auto& r : noiseless) ok0 += r.fc.rounds <= testing::round_bound(r.gaps);
    const int bound = testing::round_bound(family_gaps);
    int ok1 = 0;
    for (const auto& r : family_runs) ok1 += r.rounds <= bound;
    const double frac = family_runs.empty() ? 0.0 : double(ok1) / double(family_runs.size());
    return Outcome{noiseless.size() == 100 && ok0 == 100 && frac >= 0.85,
                   fmt("noiseless %d/%zu; noisy %d/%zu = %.3f within %d rounds", ok0, noiseless.size(), ok1,
                       family_runs.size(), frac, bound)};
  });

  criterion(9, "active maximizing dominator in every noiseless trace", 0.0, [&] {
    int fc = 0, fb = 0;
    for (const auto& r : noiseless) {
      const ArmSet s = r.gaps.pareto_arms();
      bool okc = true, okb = true;
      for (const auto& rec : r.fc.trace) okc = okc && testing::event_p_holds(rec, r.mu, s);
      for (const auto& rec : r.fb.trace) okb = okb && testing::event_p_holds(rec, r.mu, s);
      fc += okc;
      fb += okb;
    }
    return Outcome{noiseless.size() == 100 && fc == 100 && fb == 100,
                   fmt("fixed-confidence %d/100, fixed-budget %d/100", fc, fb)};
  });

  criterion(10, "runtime of one fixed-confidence run at [K,h,d]=[500,8,8]", 10.0, [] {
    const Instance inst = make_synthetic_family(8, 8, 500, 1010);
    RngStream rng(1010, 0);
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = gege_fixed_confidence(inst, 0.1, rng);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return Outcome{secs < 10.0, fmt("%.3f s, %lld samples, %d rounds, correct=%d", secs,
                                    static_cast<long long>(r.total_samples), r.rounds, int(*r.correct))};
  });

  criterion(11, "bench output identical for 1 and 8 threads", 0.0, [] {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("linpsi_acc_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::vector<std::string> outputs;
    for (int threads : {1, 8}) {
      const fs::path out = dir / ("t" + std::to_string(threads) + ".csv");
      const std::string cmd = std::string("\"") + PSIBENCH_PATH +
                              "\" bench --synth-h 8 --synth-d 2 --sweep-k 16,32 --delta 0.1,0.05"
                              " --algorithm gege,gege_unstructured --reps 20 --seed 1111 --no-wall --threads " +
                              std::to_string(threads) + " --out \"" + out.string() + "\" --summary \"" +
                              (dir / "summary.csv").string() + "\"";
      if (std::system(cmd.c_str()) != 0) return Outcome{false, "psibench failed: " + cmd};
      std::ifstream in(out);
      std::stringstream ss;
      ss << in.rdbuf();
      outputs.push_back(ss.str());
    }
    fs::remove_all(dir);
    const auto lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
    return Outcome{!outputs[0].empty() && outputs[0] == outputs[1],
                   fmt("%ld lines, byte-identical: %s", long(lines), outputs[0] == outputs[1] ? "yes" : "no")};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
