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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "devenc/error.hpp"
#include "devenc/rng.hpp"
#include "devenc/stats.hpp"

using namespace devenc;

namespace {

template <typename F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double t_density(double x, double df) {
  const double c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * std::numbers::pi);
  return std::exp(c - (df + 1) / 2 * std::log1p(x * x / df));
}

double t_cdf_oracle(double t, double df) {
  const double half = simpson([df](double x) { return t_density(x, df); }, 0.0, std::abs(t));
  return t >= 0 ? 0.5 + half : 0.5 - half;
}

}  // namespace

TEST_CASE("incomplete beta matches quadrature") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 1}, {2, 3}, {5, 1.5}, {2.5, 7}}) {
    const double norm = simpson([=](double x) { return std::pow(x, a - 1) * std::pow(1 - x, b - 1); }, 0, 1);
    for (double x : {0.1, 0.35, 0.5, 0.8}) {
      const double oracle = simpson([=](double u) { return std::pow(u, a - 1) * std::pow(1 - u, b - 1); }, 0, x) / norm;
      CHECK(stats::incomplete_beta(a, b, x) == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
  CHECK(stats::incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(stats::incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK_THROWS_AS(stats::incomplete_beta(0, 3, 0.5), InvalidArgument);
}

TEST_CASE("t cdf matches quadrature of the density") {
  for (double df : {1.0, 3.0, 9.0, 30.0}) {
    for (double t : {-4.0, -1.3, 0.0, 0.7, 2.2, 6.0}) {
      CHECK(stats::t_cdf(t, df) == doctest::Approx(t_cdf_oracle(t, df)).epsilon(1e-7));
    }
  }
  // Cauchy closed form
  CHECK(stats::t_cdf(1.0, 1.0) == doctest::Approx(0.75));
}

TEST_CASE("paired t-test on a hand example") {
  const std::vector<double> a{0.80, 0.82, 0.79, 0.85, 0.81};
  const std::vector<double> b{0.78, 0.80, 0.79, 0.80, 0.80};
  // differences .02 .02 0 .05 .01: mean .02, sd sqrt(.0007/4)
  const double sd = std::sqrt((0.0 + 0.0 + 0.0004 + 0.0009 + 0.0001) / 4.0);
  const double t = 0.02 / (sd / std::sqrt(5.0));
  const auto r = stats::paired_ttest(a, b);
  CHECK(r.t == doctest::Approx(t));
  CHECK(r.df == 4.0);
  CHECK(r.p == doctest::Approx(2.0 * (1.0 - t_cdf_oracle(t, 4.0))).epsilon(1e-6));
  CHECK(r.mean_difference == doctest::Approx(0.02));
}

TEST_CASE("paired t-test degenerate and invalid inputs") {
  const std::vector<double> a{1, 2, 3};
  const auto r = stats::paired_ttest(a, std::vector<double>{0, 1, 2});
  CHECK(r.degenerate);
  CHECK(r.p == 1.0);
  CHECK_THROWS_AS(stats::paired_ttest(a, std::vector<double>{1}), ShapeError);
  CHECK_THROWS_AS(stats::paired_ttest(std::vector<double>{1}, std::vector<double>{2}), InvalidArgument);
}

TEST_CASE("null p-values are uniform (Kolmogorov-Smirnov)") {
  Rng rng(11);
  std::vector<double> ps;
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> a(10), b(10);
    for (int i = 0; i < 10; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    ps.push_back(stats::paired_ttest(a, b).p);
  }
  std::sort(ps.begin(), ps.end());
  double d = 0.0;
  const double n = static_cast<double>(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    d = std::max({d, (i + 1) / n - ps[i], ps[i] - i / n});
  }
  CHECK(d < 1.63 / std::sqrt(n));  // 1% critical value
}
