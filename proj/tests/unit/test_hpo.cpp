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

#include <cmath>
#include <sstream>

#include <doctest.h>

#include "devenc/error.hpp"
#include "devenc/hpo.hpp"
#include "devenc/synth.hpp"

using namespace devenc;
using namespace devenc::hpo;

TEST_CASE("fairness objective is mean plus twice the minimum") {
  CHECK(fairness_objective({{"a", 0.8}, {"b", 0.6}}) == 1.9);
  CHECK(fairness_objective({{"a", 0.7}}) == doctest::Approx(2.1));
  CHECK_THROWS_AS(fairness_objective({}), InvalidArgument);
}

TEST_CASE("sampled configs stay inside the space") {
  const SearchSpace space;
  Rng rng(4);
  int small_lr = 0;
  for (int i = 0; i < 500; ++i) {
    const TrainConfig c = space.sample(rng);
    CHECK(space.contains(c));
    CHECK(c.hidden2 < c.hidden1);
    small_lr += c.learning_rate < 1e-3;
  }
  // log-uniform over two decades puts half the mass below the geometric middle
  CHECK(small_lr > 200);
  CHECK(small_lr < 300);
  CHECK(space.contains(TrainConfig{}));
}

TEST_CASE("search space json overrides selected bounds and validates") {
  const SearchSpace s = search_space_from_json(nlohmann::json::parse(R"({"dropout": [0.1, 0.2]})"));
  CHECK(s.dropout_min == 0.1);
  CHECK(s.dropout_max == 0.2);
  CHECK(s.hidden1_max == 512);
  CHECK_THROWS(search_space_from_json(nlohmann::json::parse(R"({"dropout": [0.3, 0.2]})")));
  CHECK_THROWS(search_space_from_json(nlohmann::json::parse(R"({"bogus": [1, 2]})")));
  const SearchSpace back = search_space_from_json(to_json(s));
  CHECK(to_json(back) == to_json(s));
}

TEST_CASE("a short search logs every trial and picks the best objective") {
  SynthConfig sc;
  sc.n_countries = 4;
  sc.rows_per_country = 150;
  const Dataset d = synth_generate(sc);
  SearchSpace space;
  space.hidden1_max = 64;
  space.hidden2_max = 32;
  SearchConfig cfg;
  cfg.trials = 3;
  cfg.pretrain_epochs = 2;
  cfg.finetune_max_epochs = 5;
  const SearchResult r = run_search(space, d, {"C01", "C02"}, {"C03", "C04"}, cfg);
  REQUIRE(r.log.size() == 3);
  double best = -1e9;
  for (const auto& t : r.log) {
    CHECK(t.ok);
    CHECK(t.per_country_auc.size() == 2);
    CHECK(t.objective == doctest::Approx(fairness_objective(t.per_country_auc)));
    best = std::max(best, t.objective);
  }
  CHECK(r.best.objective == best);
  const std::string csv = log_csv(r);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header ==
        "trial_index,learning_rate,l2,hidden1,hidden2,dropout,batch_size,mask_ratio,mean_auc,min_auc,objective,status");
  cfg.jobs = 3;
  CHECK(log_csv(run_search(space, d, {"C01", "C02"}, {"C03", "C04"}, cfg)) == csv);
  CHECK_THROWS_AS(run_search(space, d, {"C01"}, {"C01"}, cfg), InvalidArgument);
}
