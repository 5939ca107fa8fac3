#include "linpsi/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "linpsi/errors.hpp"
#include "linpsi/regression.hpp"

namespace linpsi {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class T>
T to_integer(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw DataError("expected an integer, got '" + t + "'", line);
  }
  return v;
}

// Column index after a one-letter prefix, e.g. "f3" -> 3.
std::optional<std::size_t> column_index(const std::string& name, char prefix) {
  if (name.size() < 2 || name[0] != prefix) return std::nullopt;
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), v);
  if (ec != std::errc() || ptr != name.data() + name.size() || v == 0) return std::nullopt;
  return v;
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == ';') c = ' ';
  }
  return s;
}

std::string join_arms(const ArmSet& arms) {
  std::string out;
  for (std::size_t k = 0; k < arms.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(arms[k] + 1);
  }
  return out;
}

std::size_t feature_rank(const Instance& instance) {
  return subspace_basis(instance.features()).rank();
}

}  // namespace

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest form that round-trips.
  for (int p = 1; p <= 17; ++p) {
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "%.*g", p, v);
    if (std::strtod(tmp, nullptr) == v) return tmp;
  }
  return buf;
}

Instance parse_instance(std::istream& in, const LoadOptions& options,
                        std::vector<std::string>* warnings) {
  std::string line;
  std::size_t lineno = 0;
  do {
    if (!std::getline(in, line)) throw DataError("instance file is empty");
    ++lineno;
  } while (is_blank(line));
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const std::vector<std::string> header = split(line);
  std::size_t h = 0;
  std::size_t d = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (auto f = column_index(name, 'f'); f && d == 0 && *f == h + 1) {
      ++h;
    } else if (auto y = column_index(name, 'y'); y && h > 0 && *y == d + 1) {
      ++d;
    } else {
      throw DataError("header must read f1,...,fh,y1,...,yd; unexpected column '" + name + "'",
                      lineno);
    }
  }
  if (h == 0 || d == 0) throw DataError("header needs at least one f and one y column", lineno);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != h + d) {
      throw DataError("expected " + std::to_string(h + d) + " fields, found " +
                          std::to_string(cells.size()),
                      lineno);
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = to_double(cells[c]);
      if (!v) throw DataError("non-numeric value '" + trim(cells[c]) + "' in column " +
                                  trim(header[c]),
                              lineno);
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("instance file has no data rows", lineno);

  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix x(k, static_cast<Eigen::Index>(h));
  Matrix y(k, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < h; ++c) x(i, static_cast<Eigen::Index>(c)) = r[c];
    for (std::size_t c = 0; c < d; ++c) y(i, static_cast<Eigen::Index>(c)) = r[h + c];
  }
  if (options.normalize) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double m = x.col(c).cwiseAbs().maxCoeff();
      if (m > 0.0) x.col(c) /= m;
    }
  }

  if (options.mode == LoadMode::raw) return Instance::fixed_means(std::move(x), std::move(y), options.sigma);

  const SubspaceBasis basis = subspace_basis(x);
  if (basis.rank() < h && warnings) {
    warnings->push_back("feature matrix has rank " + std::to_string(basis.rank()) + " < h = " +
                        std::to_string(h) + "; fitting on its span");
  }
  const Matrix vdag = pseudo_inverse(x.transpose() * x, basis);
  Matrix theta = vdag * x.transpose() * y;
  return Instance::linear(std::move(x), std::move(theta), options.sigma);
}

Instance load_instance(const std::string& path, const LoadOptions& options,
                       std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_instance(in, options, warnings);
}

void write_instance(std::ostream& out, const Instance& instance) {
  const std::size_t h = instance.dim();
  const std::size_t d = instance.objectives();
  for (std::size_t c = 0; c < h; ++c) out << (c ? "," : "") << 'f' << c + 1;
  for (std::size_t c = 0; c < d; ++c) out << ",y" << c + 1;
  out << '\n';
  for (std::size_t i = 0; i < instance.arms(); ++i) {
    for (std::size_t c = 0; c < h; ++c) {
      out << (c ? "," : "")
          << format_number(instance.features()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    }
    for (std::size_t c = 0; c < d; ++c) {
      out << ',' << format_number(instance.means().row(i)(static_cast<Eigen::Index>(c)));
    }
    out << '\n';
  }
}

Matrix parse_matrix(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const std::vector<std::string> cells = split(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      const auto v = to_double(c);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw DataError("non-numeric feature row", lineno);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("expected " + std::to_string(rows.front().size()) + " fields, found " +
                          std::to_string(row.size()),
                      lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("feature file has no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return m;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gege: return "gege";
    case Algorithm::uniform: return "uniform";
    case Algorithm::gege_unstructured: return "gege_unstructured";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "gege") return Algorithm::gege;
  if (name == "uniform") return Algorithm::uniform;
  if (name == "gege_unstructured" || name == "unstructured") return Algorithm::gege_unstructured;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

ResultRow run_single(const Instance& instance, Setting setting, Algorithm algorithm, double param,
                     double epsilon, std::uint64_t seed, std::uint64_t stream_id,
                     RunResult* trace) {
  ResultRow row;
  row.stream_id = stream_id;
  row.algorithm = to_string(algorithm);
  row.k = instance.arms();
  row.d = instance.objectives();
  row.param = param;

  const auto start = std::chrono::steady_clock::now();
  try {
    if (algorithm == Algorithm::uniform && setting == Setting::fixed_confidence) {
      throw InvalidArgument("the uniform baseline only runs with a fixed budget");
    }
    const Instance view = algorithm == Algorithm::gege_unstructured ? unstructured(instance) : instance;
    row.h = feature_rank(view);
    RngStream rng(seed, stream_id);
    RunResult result;
    if (setting == Setting::fixed_budget) {
      if (!(param >= 0.0) || param != std::floor(param) || param > 9.0e15) {
        throw InvalidArgument("budget must be a non-negative integer");
      }
      const auto t = static_cast<Count>(param);
      result = algorithm == Algorithm::uniform ? uniform_fixed_budget(view, t, rng)
                                               : gege_fixed_budget(view, t, rng);
    } else {
      result = gege_fixed_confidence(view, param, rng, {epsilon});
    }
    row.total_samples = result.total_samples;
    row.rounds = result.rounds;
    row.correct = result.correct;
    row.recommended = result.recommended;
    if (trace) *trace = std::move(result);
  } catch (const Error& e) {
    row.error = sanitize(e.what());
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ResultRow> run_benchmark(const ExperimentConfig& config) {
  if (config.reps < 1) throw InvalidArgument("replications must be >= 1");
  if (config.instances.empty()) throw InvalidArgument("no instance to run");
  if (config.params.empty()) throw InvalidArgument("no budget or delta given");
  if (config.algorithms.empty()) throw InvalidArgument("no algorithm selected");

  struct Job {
    const Instance* instance;
    double param;
    Algorithm algorithm;
    std::uint64_t stream;
  };
  std::vector<Job> jobs;
  for (const auto& inst : config.instances) {
    for (double p : config.params) {
      for (Algorithm a : config.algorithms) {
        for (int s = 0; s < config.reps; ++s) {
          jobs.push_back({&inst, p, a, static_cast<std::uint64_t>(s)});
        }
      }
    }
  }

  std::vector<ResultRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Job& job = jobs[j];
      rows[j] = run_single(*job.instance, config.setting, job.algorithm, job.param, config.epsilon,
                           config.seed, job.stream);
    }
  };
  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(jobs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Summary> aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw InvalidArgument("nothing to aggregate");
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::size_t, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    Key key{r.algorithm, r.k, r.h, r.d, r.param};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<Summary> out;
  for (const auto& key : order) {
    Summary s;
    std::tie(s.algorithm, s.k, s.h, s.d, s.param) = key;
    std::vector<double> samples;
    Count rounds = 0;
    for (const ResultRow* r : groups[key]) {
      if (!r->correct) {
        ++s.failures;
        continue;
      }
      ++s.runs;
      if (!*r->correct) ++s.errors;
      samples.push_back(static_cast<double>(r->total_samples));
      rounds += r->rounds;
    }
    if (s.runs > 0) {
      const double n = static_cast<double>(s.runs);
      s.error_rate = static_cast<double>(s.errors) / n;
      Count total = 0;
      for (double v : samples) total += static_cast<Count>(v);
      s.mean_samples = static_cast<double>(total) / n;
      s.median_samples = quantile(samples, 0.5);
      s.p90_samples = quantile(samples, 0.9);
      s.mean_rounds = static_cast<double>(rounds) / n;
    } else {
      s.error_rate = s.mean_samples = s.median_samples = s.p90_samples = s.mean_rounds =
          std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool include_wall) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << r.stream_id << ',' << r.algorithm << ',' << r.k << ',' << r.h << ',' << r.d << ','
        << format_number(r.param) << ',' << r.total_samples << ',' << r.rounds << ',';
    if (r.correct) out << (*r.correct ? 1 : 0);
    out << ',' << (r.error.empty() ? join_arms(r.recommended) : "error: " + r.error) << ',';
    if (include_wall) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
      out << buf;
    }
    out << '\n';
  }
}

void write_results_json(std::ostream& out, const std::vector<ResultRow>& rows, bool include_wall) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["stream_id"] = r.stream_id;
    j["algorithm"] = r.algorithm;
    j["K"] = r.k;
    j["h"] = r.h;
    j["d"] = r.d;
    j["param"] = r.param;
    j["total_samples"] = r.total_samples;
    j["rounds"] = r.rounds;
    j["correct"] = r.correct ? nlohmann::ordered_json(*r.correct) : nlohmann::ordered_json(nullptr);
    std::vector<std::size_t> rec;
    for (auto a : r.recommended) rec.push_back(a + 1);
    j["recommended"] = rec;
    if (include_wall) j["wall_ms"] = r.wall_ms;
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kResultsHeader) {
    throw DataError("missing results header", 1);
  }
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const auto cells = split(line);
    if (cells.size() != 11) {
      throw DataError("expected 11 fields, found " + std::to_string(cells.size()), lineno);
    }
    ResultRow r;
    r.stream_id = to_integer<std::uint64_t>(cells[0], lineno);
    r.algorithm = trim(cells[1]);
    r.k = to_integer<std::size_t>(cells[2], lineno);
    r.h = to_integer<std::size_t>(cells[3], lineno);
    r.d = to_integer<std::size_t>(cells[4], lineno);
    const auto p = to_double(cells[5]);
    if (!p) throw DataError("non-numeric param", lineno);
    r.param = *p;
    r.total_samples = to_integer<Count>(cells[6], lineno);
    r.rounds = to_integer<int>(cells[7], lineno);
    const std::string c = trim(cells[8]);
    if (c == "1" || c == "0") {
      r.correct = c == "1";
    } else if (!c.empty()) {
      throw DataError("correct must be 0, 1 or empty", lineno);
    }
    const std::string rec = trim(cells[9]);
    if (rec.rfind("error: ", 0) == 0) {
      r.error = rec.substr(7);
    } else if (!rec.empty()) {
      for (const auto& a : split(rec, ';')) {
        const auto idx = to_integer<std::size_t>(a, lineno);
        if (idx == 0) throw DataError("arm indices are 1-based", lineno);
        r.recommended.push_back(idx - 1);
      }
    }
    if (!trim(cells[10]).empty()) {
      const auto w = to_double(cells[10]);
      if (!w) throw DataError("non-numeric wall_ms", lineno);
      r.wall_ms = *w;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<Summary>& rows) {
  out << "algorithm,K,h,d,param,runs,failures,error_rate,mean_samples,median_samples,"
         "p90_samples,mean_rounds\n";
  for (const auto& s : rows) {
    out << s.algorithm << ',' << s.k << ',' << s.h << ',' << s.d << ',' << format_number(s.param)
        << ',' << s.runs << ',' << s.failures << ',' << format_number(s.error_rate) << ','
        << format_number(s.mean_samples) << ',' << format_number(s.median_samples) << ','
        << format_number(s.p90_samples) << ',' << format_number(s.mean_rounds) << '\n';
  }
}

void write_summary_json(std::ostream& out, const std::vector<Summary>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  for (const auto& s : rows) {
    nlohmann::ordered_json j;
    j["algorithm"] = s.algorithm;
    j["K"] = s.k;
    j["h"] = s.h;
    j["d"] = s.d;
    j["param"] = s.param;
    j["runs"] = s.runs;
    j["failures"] = s.failures;
    j["error_rate"] = num(s.error_rate);
    j["mean_samples"] = num(s.mean_samples);
    j["median_samples"] = num(s.median_samples);
    j["p90_samples"] = num(s.p90_samples);
    j["mean_rounds"] = num(s.mean_rounds);
    arr.push_back(std::move(j));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace linpsi
