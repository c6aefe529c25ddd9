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

#pragma once

#include <span>
#include <vector>

namespace devenc::metrics {

// Area under the ROC curve via the Mann-Whitney rank sum (one sort, ties
// counted as one half). Throws UndefinedMetric unless both classes appear.
double auc(std::span<const double> scores, std::span<const double> labels);

double brier(std::span<const double> probs, std::span<const double> labels);

// Expected calibration error over equal-width bins on [0, 1]; empty bins
// are skipped.
double ece(std::span<const double> probs, std::span<const double> labels, int n_bins = 10);

struct ReliabilityBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double observed_rate = 0.0;
};

std::vector<ReliabilityBin> reliability_bins(std::span<const double> probs, std::span<const double> labels,
                                             int n_bins = 10);

// Linear-interpolation percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double stddev(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace devenc::metrics
