#pragma once

// Instance generators and trace checks shared by unit and acceptance tests.

#include <algorithm>
#include <random>

#include "linpsi/environment.hpp"
#include "linpsi/gege.hpp"
#include "oracle.hpp"

namespace testing {

using namespace linpsi;

// Random linear instance with K <= 20, h <= 6, d <= 4 whose true gaps
// are all at least 0.05.
inline Instance random_instance(std::mt19937_64& gen, double sigma = 0.0) {
  std::uniform_int_distribution<int> hd(1, 6), dd(1, 4);
  for (;;) {
    const int h = hd(gen), d = dd(gen);
    const int k = std::uniform_int_distribution<int>(std::max(h, 2), 20)(gen);
    const oracle::RandomLinear r = oracle::random_linear(gen, k, h, d);
    if (!oracle::well_separated(oracle::true_gaps(r.mu), 0.05, 0.0)) continue;
    return Instance::linear(r.x, r.theta, sigma);
  }
}

inline bool contains(const ArmSet& s, std::size_t a) { return std::binary_search(s.begin(), s.end(), a); }

// A, B, D partition [K] and are sorted.
inline bool partitions(const RoundRecord& rec, std::size_t k) {
  std::vector<int> seen(k, 0);
  for (const ArmSet* s : {&rec.active, &rec.accepted, &rec.rejected}) {
    if (!std::is_sorted(s->begin(), s->end())) return false;
    for (auto a : *s) {
      if (a >= k) return false;
      ++seen[a];
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

// Every active sub-optimal arm keeps some maximizer of m(i, j) over S*
// active.
inline bool event_p_holds(const RoundRecord& rec, const Matrix& mu, const ArmSet& pareto) {
  for (auto i : rec.active) {
    if (contains(pareto, i)) continue;
    double best = -oracle::kInf;
    for (auto j : pareto) best = std::max(best, oracle::m(mu, int(i), int(j)));
    bool kept = false;
    for (auto j : pareto) {
      if (oracle::m(mu, int(i), int(j)) == best && contains(rec.active, j)) kept = true;
    }
    if (!kept) return false;
  }
  return true;
}

// Rounds allowed at zero noise: ceil(log2(1 / smallest gap)), at least 1.
inline int round_bound(const GapProfile& g) {
  const double smallest = g.gap[g.sorted_gaps.front()];
  return std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / smallest))));
}

}  // namespace testing
