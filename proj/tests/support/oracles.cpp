// Copyright 2026 The mgforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mgforge::testing {

double oracle_unique_at(const std::vector<std::string>& items, std::size_t k) {
  const std::size_t n = std::min(k, items.size());
  if (n == 0) {
    return 0.0;
  }
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool first = true;
    for (std::size_t j = 0; j < i; ++j) {
      if (items[j] == items[i]) {
        first = false;
        break;
      }
    }
    distinct += first ? 1 : 0;
  }
  return static_cast<double>(distinct) / static_cast<double>(n);
}

double oracle_novelty(const std::vector<std::string>& items, const std::vector<std::string>& train) {
  std::vector<std::string> distinct;
  for (const auto& s : items) {
    if (std::find(distinct.begin(), distinct.end(), s) == distinct.end()) {
      distinct.push_back(s);
    }
  }
  if (distinct.empty()) {
    return 0.0;
  }
  std::size_t novel = 0;
  for (const auto& s : distinct) {
    novel += std::find(train.begin(), train.end(), s) == train.end() ? 1 : 0;
  }
  return static_cast<double>(novel) / static_cast<double>(distinct.size());
}

double oracle_tanimoto(const chem::Fingerprint& a, const chem::Fingerprint& b) {
  int both = 0;
  int either = 0;
  for (int i = 0; i < a.width(); ++i) {
    both += (a.test(i) && b.test(i)) ? 1 : 0;
    either += (a.test(i) || b.test(i)) ? 1 : 0;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / either;
}

double oracle_snn(const std::vector<chem::Fingerprint>& gen, const std::vector<chem::Fingerprint>& ref) {
  double total = 0.0;
  for (const auto& g : gen) {
    double best = 0.0;
    for (const auto& r : ref) {
      best = std::max(best, oracle_tanimoto(g, r));
    }
    total += best;
  }
  return total / static_cast<double>(gen.size());
}

double oracle_multiset_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> keys = a;
  keys.insert(keys.end(), b.begin(), b.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& k : keys) {
    const auto x = static_cast<double>(std::count(a.begin(), a.end(), k));
    const auto y = static_cast<double>(std::count(b.begin(), b.end(), k));
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));
}

double min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  // Potentials formulation, 1-based with a dummy column 0.
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0);
  std::vector<std::size_t> way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    total += cost[p[j] - 1][j - 1];
  }
  return total;
}

double oracle_w1(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::lcm(a.size(), b.size());
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(a[i % a.size()]);
    y.push_back(b[i % b.size()]);
  }
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i][j] = std::abs(x[i] - y[j]);
    }
  }
  return min_cost_assignment(cost) / static_cast<double>(n);
}

}  // namespace mgforge::testing
