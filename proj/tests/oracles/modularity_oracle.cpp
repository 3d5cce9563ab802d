#include "modularity_oracle.hpp"

#include <functional>

namespace mefr::testing {

namespace {

std::vector<std::vector<double>> adjacency(const FunctionCallGraph &g, bool unit) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto &e : g.edges()) {
    if (e.caller == e.callee)
      continue;
    if (unit) {
      a[e.caller][e.callee] = a[e.callee][e.caller] = 1.0;
    } else {
      a[e.caller][e.callee] += 1.0;
      a[e.callee][e.caller] += 1.0;
    }
  }
  return a;
}

double q_of(const std::vector<std::vector<double>> &a, const std::vector<int> &label) {
  const std::size_t n = a.size();
  std::vector<double> k(n, 0.0);
  double two_m = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += a[i][j];
      two_m += a[i][j];
    }
  if (two_m == 0)
    return 0;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (label[i] == label[j])
        q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

} // namespace

double brute_modularity(const FunctionCallGraph &g, const std::vector<int> &label,
                        bool unit_weights) {
  return q_of(adjacency(g, unit_weights), label);
}

BestPartition best_partition(const FunctionCallGraph &g, bool unit_weights) {
  const auto a = adjacency(g, unit_weights);
  const std::size_t n = g.size();
  BestPartition best;
  bool have = false;
  std::vector<int> label(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int used) {
    if (i == n) {
      double q = q_of(a, label);
      if (!have || q > best.q + 1e-12) {
        have = true;
        best = {q, label};
      }
      return;
    }
    for (int c = 0; c <= used; ++c) {
      label[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

} // namespace mefr::testing
