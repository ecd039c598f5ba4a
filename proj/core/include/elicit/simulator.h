// Copyright 2026 The Elicit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ELICIT_SIMULATOR_H_
#define ELICIT_SIMULATOR_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "elicit/calendar.h"
#include "elicit/catalog.h"
#include "elicit/dataset_io.h"

namespace elicit {

struct SimConfig {
  int num_users = 3300;
  int num_movies = 2000;
  int horizon_days = 50;
  double y = 11.0;
  std::uint64_t seed = 1;
  Date start_date = Date{std::chrono::year{2023}, std::chrono::month{3},
                         std::chrono::day{1}};

  // Per-user response propensity rho ~ Beta(a, b), multiplied by
  // response_scale and, on rec slots, by rec_response_multiplier.
  double beta_a = 0.19;
  double beta_b = 3.93;
  double response_scale = 1.0;
  double rec_response_multiplier = 1.0;

  // P(consume) = clamp(beta0 + beta1 * predicted + beta2 * (6 - certainty)).
  double beta0 = 0.7;
  double beta1 = 0.028;
  double beta2 = -0.134;

  double signal_sd = 1.0;
  int rec_slate_size = 10;
  double rec_noise = 0.5;
  double visit_prob = 1.0;

  // Truth x = clamp(u . v + noise) with rank-d factors.
  int latent_dim = 3;
  double factor_mean = 1.0;
  double factor_sd = 0.3;
  double value_noise = 0.5;
  // Prior mean = x + bias; prior sd grows linearly from min to max with the
  // movie's popularity rank, times a lognormal jitter.
  double prior_bias_sd = 0.5;
  double prior_sd_min = 0.3;
  double prior_sd_max = 1.5;
  double prior_sd_jitter = 0.25;

  // Catalog generator.
  int background_max_ratings = 3000;
  double zipf_exponent = 0.7;
  double recent_release_fraction = 0.1;
  double initial_rated_mean = 30.0;
  double seen_unrated_mean = 3.0;

  // Throws std::invalid_argument naming the first bad field.
  void Validate() const;
};

// Flat `key=value` lines; `#` starts a comment. Unknown keys throw.
SimConfig ParseSimConfig(std::string_view text);
SimConfig ReadSimConfig(const std::filesystem::path& path);
// Every field, one per line, in a fixed order.
std::string FormatSimConfig(const SimConfig& config);
// FNV-1a of FormatSimConfig, as 16 hex digits.
std::string SimConfigHash(const SimConfig& config);

// User i has id i + 1 and movie j has id j + 1. Matrices are user-major.
struct Population {
  int num_users = 0;
  int num_movies = 0;
  int latent_dim = 0;
  std::vector<double> user_factors;  // num_users x latent_dim
  std::vector<double> item_factors;  // num_movies x latent_dim
  std::vector<float> truth;
  std::vector<float> prior_mean;
  std::vector<float> prior_sd;
  std::vector<double> rho;
  // 0 is the most popular movie.
  std::vector<int> popularity_rank;
  // Ascending cut points on 1 / sd; certainty = 1 + number of cuts below.
  std::array<double, 4> certainty_cuts{};

  std::size_t At(int user, int movie) const {
    return static_cast<std::size_t>(user) * static_cast<std::size_t>(num_movies) +
           static_cast<std::size_t>(movie);
  }
  int Certainty(double sd) const;
};

// Deterministic per config.
Population SpawnPopulation(const SimConfig& config);

struct SimLogs {
  std::vector<Movie> movies;
  std::vector<RatingEvent> ratings;
  std::vector<BeliefRecord> beliefs;
  std::vector<ElicitationRequest> requests;
  std::vector<RecommendationLogRecord> recommendations;
  std::vector<ConsumptionRecord> consumption;
  int pool_builds = 0;
};

// Runs the day loop over the horizon. Every presented slot yields a belief
// row; isSeen is -1 when the user did not respond. Logs are sorted by
// (timestamp, user, movie).
SimLogs RunSimulation(const SimConfig& config);
SimLogs RunSimulation(const SimConfig& config, const Population& population);

// Writes movies.csv, the five log files and manifest.txt.
void WriteSimLogs(const SimLogs& logs, const SimConfig& config,
                  const std::filesystem::path& dir);

}  // namespace elicit

#endif  // ELICIT_SIMULATOR_H_
