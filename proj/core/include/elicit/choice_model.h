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

#ifndef ELICIT_CHOICE_MODEL_H_
#define ELICIT_CHOICE_MODEL_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "elicit/rating.h"

namespace elicit {

// Strictly increasing, continuous utility over monetary equivalents,
// optionally composed with a positive affine map: scale * base(x) + offset.
class UtilityFunction {
 public:
  enum class Kind { kLinear, kPower, kExponential };

  static UtilityFunction Linear();
  // sign(x) * |x|^alpha with alpha in (0, 1].
  static UtilityFunction Power(double alpha);
  // -exp(-a x) with risk aversion a > 0.
  static UtilityFunction Exponential(double risk_aversion);

  // Returns scale * (*this) + offset. Throws unless scale > 0.
  UtilityFunction Affine(double scale, double offset) const;

  double operator()(double x) const;

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  double scale() const { return scale_; }
  double offset() const { return offset_; }

 private:
  UtilityFunction(Kind kind, double parameter)
      : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_;
  double scale_ = 1.0;
  double offset_ = 0.0;
};

// A user's belief over one good's monetary equivalent: Gaussian, or a finite
// mixture of point masses for exact small-case arithmetic.
class GoodBelief {
 public:
  struct Gaussian {
    double mean = 0.0;
    double sd = 0.0;
  };
  struct Discrete {
    std::vector<double> support;
    std::vector<double> weights;
  };

  // Throws std::invalid_argument for sd < 0 or non-finite parameters.
  static GoodBelief Normal(double mean, double sd);
  static GoodBelief PointMass(double value) { return Normal(value, 0.0); }
  // Weights are normalized; throws on empty, mismatched or non-positive
  // total weight.
  static GoodBelief Mixture(std::vector<double> support,
                            std::vector<double> weights);

  bool is_gaussian() const { return std::holds_alternative<Gaussian>(rep_); }
  const Gaussian& gaussian() const { return std::get<Gaussian>(rep_); }
  const Discrete& discrete() const { return std::get<Discrete>(rep_); }

  double mean() const;
  double variance() const;

  // Draws a value from the belief.
  double Sample(std::mt19937_64& rng) const;

 private:
  explicit GoodBelief(std::variant<Gaussian, Discrete> rep)
      : rep_(std::move(rep)) {}
  std::variant<Gaussian, Discrete> rep_;
};

using BeliefMap = std::map<MovieId, GoodBelief>;
using TruthMap = std::map<MovieId, double>;

// Recommending movie n delivers s = x_n + eps, eps ~ Normal(0, noise_sd^2).
struct SignalModel {
  double noise_sd = 1.0;
};

struct RecommendationSlate {
  std::vector<MovieId> movies;
  // Optional realized signals, aligned with `movies`. When absent they are
  // drawn from the signal model around the true values.
  std::optional<std::vector<double>> signals;

  friend bool operator==(const RecommendationSlate&,
                         const RecommendationSlate&) = default;
};

inline constexpr int kGaussHermiteNodes = 64;

struct QuadratureRule {
  std::array<double, kGaussHermiteNodes> nodes;
  std::array<double, kGaussHermiteNodes> weights;
};

// Gauss-Hermite rule for integrals of f(x) exp(-x^2) over the real line.
const QuadratureRule& GaussHermite64();

// E[u(X)] under the belief. Linear utilities and point masses are exact;
// other Gaussian cases use 64-node Gauss-Hermite quadrature.
double ExpectedUtility(const GoodBelief& belief, const UtilityFunction& u);

// Argmax of expected utility; ties go to the lowest id. Throws
// std::invalid_argument on an empty map.
MovieId ChooseWithoutRecommendation(const BeliefMap& beliefs,
                                    const UtilityFunction& u);
double MaximizedExpectedUtility(const BeliefMap& beliefs,
                                const UtilityFunction& u);

// Bayesian update of one belief on one signal.
GoodBelief Posterior(const GoodBelief& prior, double signal,
                     const SignalModel& model);

// Updates the beliefs of every slate movie on its signal; other beliefs are
// unchanged. Throws when a slate movie lacks a belief or a truth, when slate
// ids repeat, or when the signal model is invalid.
BeliefMap UpdateBeliefs(const BeliefMap& beliefs,
                        const RecommendationSlate& slate, const TruthMap& truths,
                        const SignalModel& signal, std::mt19937_64& rng);

// Choice after updating on the slate; the argmax ranges over all goods.
MovieId ChooseWithRecommendation(const BeliefMap& beliefs,
                                 const RecommendationSlate& slate,
                                 const TruthMap& truths,
                                 const SignalModel& signal,
                                 const UtilityFunction& u, std::mt19937_64& rng);

struct MonteCarloOptions {
  int draws = 2000;
  std::uint64_t seed = 0x5eed;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo estimate of E[u*REC(slate)] over signal noise around the given
// truths. Every call restarts the stream from options.seed, so competing
// slates are compared on common random numbers.
MonteCarloEstimate ExpectedMaximizedUtility(const BeliefMap& beliefs,
                                            std::span<const MovieId> slate,
                                            const TruthMap& truths,
                                            const SignalModel& signal,
                                            const UtilityFunction& u,
                                            const MonteCarloOptions& options = {});

// Value of the slate to the user judged ex ante: truths are drawn from the
// user's own beliefs, then signals around them. Estimates
// E[u*REC] - u*NREC, which is non-negative for Bayesian updating.
MonteCarloEstimate PreposteriorValue(const BeliefMap& beliefs,
                                     std::span<const MovieId> slate,
                                     const SignalModel& signal,
                                     const UtilityFunction& u,
                                     const MonteCarloOptions& options = {});

// Exhaustive search over k-subsets of `candidates` for the slate maximizing
// ExpectedMaximizedUtility; ties go to the lexicographically smallest sorted
// id set. Throws when k < 1 or k exceeds the number of distinct candidates.
RecommendationSlate OptimalSlate(const BeliefMap& beliefs, const TruthMap& truths,
                                 const SignalModel& signal,
                                 const UtilityFunction& u, int k,
                                 std::span<const MovieId> candidates,
                                 const MonteCarloOptions& options = {});

}  // namespace elicit

#endif  // ELICIT_CHOICE_MODEL_H_
