// Copyright 2026 The devenc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "devenc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "devenc/error.hpp"

namespace devenc::metrics {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("score and label lengths differ");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_lengths(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0.0;
  double rank_sum = 0.0;  // sum of 1-based average ranks of positives
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double tie_pos = 0.0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      const double y = labels[order[j]];
      if (y != 0.0 && y != 1.0) throw InvalidArgument("AUC labels must be 0 or 1");
      tie_pos += y;
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += tie_pos * avg_rank;
    pos += tie_pos;
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) throw UndefinedMetric("AUC undefined: only one class present");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double brier(std::span<const double> probs, std::span<const double> labels) {
  check_lengths(probs, labels);
  if (probs.empty()) throw InvalidArgument("brier score of an empty sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = probs[i] - labels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(probs.size());
}

std::vector<ReliabilityBin> reliability_bins(std::span<const double> probs, std::span<const double> labels,
                                             int n_bins) {
  check_lengths(probs, labels);
  if (n_bins < 1) throw InvalidArgument("n_bins must be >= 1");
  std::vector<ReliabilityBin> bins(static_cast<std::size_t>(n_bins));
  std::vector<double> conf(bins.size(), 0.0), hits(bins.size(), 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probabilities must lie in [0, 1]");
    const auto b = std::min(static_cast<std::size_t>(p * n_bins), bins.size() - 1);
    bins[b].count += 1;
    conf[b] += p;
    hits[b] += labels[i];
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    bins[b].lower = static_cast<double>(b) / n_bins;
    bins[b].upper = static_cast<double>(b + 1) / n_bins;
    if (bins[b].count > 0) {
      bins[b].mean_confidence = conf[b] / static_cast<double>(bins[b].count);
      bins[b].observed_rate = hits[b] / static_cast<double>(bins[b].count);
    }
  }
  return bins;
}

double ece(std::span<const double> probs, std::span<const double> labels, int n_bins) {
  if (probs.empty()) throw InvalidArgument("ECE of an empty sample");
  const auto bins = reliability_bins(probs, labels, n_bins);
  double total = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    total += static_cast<double>(b.count) * std::abs(b.observed_rate - b.mean_confidence);
  }
  return total / static_cast<double>(probs.size());
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace devenc::metrics
