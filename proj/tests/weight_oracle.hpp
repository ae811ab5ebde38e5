#pragma once

// Reference weight solver: the edge equations plus one zero-sum row per
// connected component, solved as a dense least-squares problem with Eigen.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "dlom/decision.hpp"

namespace dlom::testing {

inline std::array<double, kNumObjectives> oracle_weights(
    const std::vector<RatioJudgment>& judgments) {
  constexpr int n = static_cast<int>(kNumObjectives);
  std::map<std::pair<int, int>, RatioJudgment> last;
  for (const RatioJudgment& j : judgments) {
    int a = static_cast<int>(index(j.more_important));
    int b = static_cast<int>(index(j.less_important));
    last[{std::min(a, b), std::max(a, b)}] = j;
  }

  // Components by repeated relaxation.
  std::array<int, n> label{};
  for (int i = 0; i < n; ++i) label[i] = i;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [pair, j] : last) {
      int lo = std::min(label[pair.first], label[pair.second]);
      for (int v : {pair.first, pair.second})
        if (label[v] != lo) {
          label[v] = lo;
          changed = true;
        }
    }
  }
  std::vector<int> roots;
  for (int i = 0; i < n; ++i)
    if (std::find(roots.begin(), roots.end(), label[i]) == roots.end()) roots.push_back(label[i]);

  int rows = static_cast<int>(last.size() + roots.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  int r = 0;
  for (const auto& [pair, j] : last) {
    a(r, static_cast<int>(index(j.more_important))) = 1.0;
    a(r, static_cast<int>(index(j.less_important))) = -1.0;
    b(r) = std::log(j.ratio);
    ++r;
  }
  for (int root : roots) {
    for (int i = 0; i < n; ++i)
      if (label[i] == root) a(r, i) = 1.0;
    ++r;
  }
  Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  Eigen::VectorXd w = x.array().exp();
  w /= w.sum();
  std::array<double, kNumObjectives> out{};
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = w(i);
  return out;
}

inline std::array<double, kNumObjectives> oracle_weights(
    const std::vector<PairwiseComparison>& comparisons) {
  std::vector<RatioJudgment> j;
  for (const PairwiseComparison& c : comparisons)
    j.push_back({c.more_important, c.less_important, ratio(c.intensity)});
  return oracle_weights(j);
}

// Every ordered pair a<b with ratio w_a / w_b.
inline std::vector<RatioJudgment> consistent_judgments(
    const std::array<double, kNumObjectives>& w) {
  std::vector<RatioJudgment> out;
  for (std::size_t a = 0; a < kNumObjectives; ++a)
    for (std::size_t b = a + 1; b < kNumObjectives; ++b)
      out.push_back({kAllObjectives[a], kAllObjectives[b], w[a] / w[b]});
  return out;
}

}  // namespace dlom::testing
