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

#include "elicit/choice_model.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace elicit {
namespace {

void RequireFinite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

QuadratureRule ComputeGaussHermite() {
  constexpr int n = kGaussHermiteNodes;
  constexpr double kEps = 1e-15;
  const double pi_m4 = std::pow(std::numbers::pi, -0.25);
  QuadratureRule rule{};
  double z = 0.0;
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Orthonormal Hermite recurrence evaluated at z.
      double p1 = pi_m4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

double GaussianExpectation(const GoodBelief::Gaussian& g,
                           const UtilityFunction& u) {
  if (g.sd == 0.0) return u(g.mean);
  if (u.kind() == UtilityFunction::Kind::kLinear) {
    return u.scale() * g.mean + u.offset();
  }
  const auto& rule = GaussHermite64();
  const double spread = std::numbers::sqrt2 * g.sd;
  double acc = 0.0;
  for (int i = 0; i < kGaussHermiteNodes; ++i) {
    acc += rule.weights[i] * u(g.mean + spread * rule.nodes[i]);
  }
  return acc / std::sqrt(std::numbers::pi);
}

MonteCarloEstimate Summarize(const std::vector<double>& samples) {
  MonteCarloEstimate est;
  if (samples.empty()) return est;
  double sum = 0.0;
  for (double s : samples) sum += s;
  est.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - est.mean) * (s - est.mean);
    const double var = ss / static_cast<double>(samples.size() - 1);
    est.standard_error = std::sqrt(var / static_cast<double>(samples.size()));
  }
  return est;
}

void ValidateSignal(const SignalModel& signal) {
  if (!(signal.noise_sd > 0.0) || !std::isfinite(signal.noise_sd)) {
    throw std::invalid_argument("signal noise_sd must be positive and finite");
  }
}

// Max expected utility over goods outside the slate, or -inf if none.
double BestOutsideSlate(const BeliefMap& beliefs, std::span<const MovieId> slate,
                        const UtilityFunction& u) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [movie, belief] : beliefs) {
    if (std::find(slate.begin(), slate.end(), movie) != slate.end()) continue;
    best = std::max(best, ExpectedUtility(belief, u));
  }
  return best;
}

const GoodBelief& BeliefFor(const BeliefMap& beliefs, MovieId movie) {
  auto it = beliefs.find(movie);
  if (it == beliefs.end()) {
    throw std::invalid_argument("no belief for movie " + std::to_string(movie));
  }
  return it->second;
}

double TruthFor(const TruthMap& truths, MovieId movie) {
  auto it = truths.find(movie);
  if (it == truths.end()) {
    throw std::invalid_argument("no true value for movie " +
                                std::to_string(movie));
  }
  return it->second;
}

void RequireDistinct(std::span<const MovieId> slate) {
  std::set<MovieId> ids(slate.begin(), slate.end());
  if (ids.size() != slate.size()) {
    throw std::invalid_argument("slate ids must be distinct");
  }
}

}  // namespace

UtilityFunction UtilityFunction::Linear() { return {Kind::kLinear, 1.0}; }

UtilityFunction UtilityFunction::Power(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("power utility needs alpha in (0, 1]");
  }
  return {Kind::kPower, alpha};
}

UtilityFunction UtilityFunction::Exponential(double risk_aversion) {
  if (!(risk_aversion > 0.0) || !std::isfinite(risk_aversion)) {
    throw std::invalid_argument("exponential utility needs a > 0");
  }
  return {Kind::kExponential, risk_aversion};
}

UtilityFunction UtilityFunction::Affine(double scale, double offset) const {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(offset)) {
    throw std::invalid_argument("affine transform needs a positive scale");
  }
  UtilityFunction out = *this;
  out.scale_ = scale_ * scale;
  out.offset_ = offset_ * scale + offset;
  return out;
}

double UtilityFunction::operator()(double x) const {
  double base = 0.0;
  switch (kind_) {
    case Kind::kLinear:
      base = x;
      break;
    case Kind::kPower:
      base = std::copysign(std::pow(std::abs(x), parameter_), x);
      break;
    case Kind::kExponential:
      base = -std::exp(-parameter_ * x);
      break;
  }
  return scale_ * base + offset_;
}

GoodBelief GoodBelief::Normal(double mean, double sd) {
  RequireFinite(mean, "belief mean");
  RequireFinite(sd, "belief sd");
  if (sd < 0.0) throw std::invalid_argument("belief sd must be >= 0");
  return GoodBelief(Gaussian{mean, sd});
}

GoodBelief GoodBelief::Mixture(std::vector<double> support,
                               std::vector<double> weights) {
  if (support.empty() || support.size() != weights.size()) {
    throw std::invalid_argument("mixture needs matching non-empty support");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    RequireFinite(support[i], "mixture support");
    RequireFinite(weights[i], "mixture weight");
    if (weights[i] < 0.0) throw std::invalid_argument("negative mixture weight");
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("mixture weights sum to 0");
  for (double& w : weights) w /= total;
  return GoodBelief(Discrete{std::move(support), std::move(weights)});
}

double GoodBelief::mean() const {
  if (is_gaussian()) return gaussian().mean;
  const auto& d = discrete();
  double m = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) m += d.weights[i] * d.support[i];
  return m;
}

double GoodBelief::variance() const {
  if (is_gaussian()) return gaussian().sd * gaussian().sd;
  const auto& d = discrete();
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    v += d.weights[i] * (d.support[i] - m) * (d.support[i] - m);
  }
  return v;
}

double GoodBelief::Sample(std::mt19937_64& rng) const {
  if (is_gaussian()) {
    std::normal_distribution<double> z(0.0, 1.0);
    return gaussian().mean + gaussian().sd * z(rng);
  }
  const auto& d = discrete();
  std::discrete_distribution<std::size_t> pick(d.weights.begin(), d.weights.end());
  return d.support[pick(rng)];
}

const QuadratureRule& GaussHermite64() {
  static const QuadratureRule rule = ComputeGaussHermite();
  return rule;
}

double ExpectedUtility(const GoodBelief& belief, const UtilityFunction& u) {
  if (belief.is_gaussian()) return GaussianExpectation(belief.gaussian(), u);
  const auto& d = belief.discrete();
  double acc = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    acc += d.weights[i] * u(d.support[i]);
  }
  return acc;
}

MovieId ChooseWithoutRecommendation(const BeliefMap& beliefs,
                                    const UtilityFunction& u) {
  if (beliefs.empty()) throw std::invalid_argument("no goods to choose from");
  MovieId best = beliefs.begin()->first;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const auto& [movie, belief] : beliefs) {
    const double v = ExpectedUtility(belief, u);
    if (v > best_value) {
      best_value = v;
      best = movie;
    }
  }
  return best;
}

double MaximizedExpectedUtility(const BeliefMap& beliefs,
                                const UtilityFunction& u) {
  if (beliefs.empty()) throw std::invalid_argument("no goods to choose from");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [movie, belief] : beliefs) {
    best = std::max(best, ExpectedUtility(belief, u));
  }
  return best;
}

GoodBelief Posterior(const GoodBelief& prior, double signal,
                     const SignalModel& model) {
  ValidateSignal(model);
  RequireFinite(signal, "signal");
  const double noise_var = model.noise_sd * model.noise_sd;
  if (prior.is_gaussian()) {
    const auto& g = prior.gaussian();
    if (g.sd == 0.0) return prior;
    const double prior_var = g.sd * g.sd;
    const double precision = 1.0 / prior_var + 1.0 / noise_var;
    const double mean = (g.mean / prior_var + signal / noise_var) / precision;
    return GoodBelief::Normal(mean, std::sqrt(1.0 / precision));
  }
  const auto& d = prior.discrete();
  // Log-space likelihoods keep far-off support points from underflowing to
  // an all-zero weight vector.
  std::vector<double> log_w(d.support.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    const double r = signal - d.support[i];
    log_w[i] = d.weights[i] > 0.0
                   ? std::log(d.weights[i]) - r * r / (2.0 * noise_var)
                   : -std::numeric_limits<double>::infinity();
    max_log = std::max(max_log, log_w[i]);
  }
  std::vector<double> w(d.support.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_w[i] - max_log);
  return GoodBelief::Mixture(d.support, std::move(w));
}

BeliefMap UpdateBeliefs(const BeliefMap& beliefs,
                        const RecommendationSlate& slate, const TruthMap& truths,
                        const SignalModel& signal, std::mt19937_64& rng) {
  ValidateSignal(signal);
  RequireDistinct(slate.movies);
  if (slate.signals && slate.signals->size() != slate.movies.size()) {
    throw std::invalid_argument("slate signals must align with slate movies");
  }
  BeliefMap updated = beliefs;
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t j = 0; j < slate.movies.size(); ++j) {
    const MovieId movie = slate.movies[j];
    const GoodBelief& prior = BeliefFor(beliefs, movie);
    double s = 0.0;
    if (slate.signals) {
      s = (*slate.signals)[j];
    } else {
      s = TruthFor(truths, movie) + signal.noise_sd * z(rng);
    }
    updated.insert_or_assign(movie, Posterior(prior, s, signal));
  }
  return updated;
}

MovieId ChooseWithRecommendation(const BeliefMap& beliefs,
                                 const RecommendationSlate& slate,
                                 const TruthMap& truths,
                                 const SignalModel& signal,
                                 const UtilityFunction& u, std::mt19937_64& rng) {
  return ChooseWithoutRecommendation(
      UpdateBeliefs(beliefs, slate, truths, signal, rng), u);
}

MonteCarloEstimate ExpectedMaximizedUtility(const BeliefMap& beliefs,
                                            std::span<const MovieId> slate,
                                            const TruthMap& truths,
                                            const SignalModel& signal,
                                            const UtilityFunction& u,
                                            const MonteCarloOptions& options) {
  ValidateSignal(signal);
  RequireDistinct(slate);
  if (options.draws < 1) throw std::invalid_argument("draws must be >= 1");
  std::vector<const GoodBelief*> priors;
  std::vector<double> truth_values;
  for (MovieId m : slate) {
    priors.push_back(&BeliefFor(beliefs, m));
    truth_values.push_back(TruthFor(truths, m));
  }
  const double outside = BestOutsideSlate(beliefs, slate, u);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> samples(static_cast<std::size_t>(options.draws));
  for (auto& sample : samples) {
    double best = outside;
    for (std::size_t j = 0; j < priors.size(); ++j) {
      const double s = truth_values[j] + signal.noise_sd * z(rng);
      best = std::max(best, ExpectedUtility(Posterior(*priors[j], s, signal), u));
    }
    sample = best;
  }
  return Summarize(samples);
}

MonteCarloEstimate PreposteriorValue(const BeliefMap& beliefs,
                                     std::span<const MovieId> slate,
                                     const SignalModel& signal,
                                     const UtilityFunction& u,
                                     const MonteCarloOptions& options) {
  ValidateSignal(signal);
  RequireDistinct(slate);
  if (options.draws < 1) throw std::invalid_argument("draws must be >= 1");
  std::vector<const GoodBelief*> priors;
  for (MovieId m : slate) priors.push_back(&BeliefFor(beliefs, m));
  const double outside = BestOutsideSlate(beliefs, slate, u);
  const double no_rec = MaximizedExpectedUtility(beliefs, u);

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> samples(static_cast<std::size_t>(options.draws));
  for (auto& sample : samples) {
    double best = outside;
    for (const GoodBelief* prior : priors) {
      const double truth = prior->Sample(rng);
      const double s = truth + signal.noise_sd * z(rng);
      best = std::max(best, ExpectedUtility(Posterior(*prior, s, signal), u));
    }
    sample = best - no_rec;
  }
  return Summarize(samples);
}

RecommendationSlate OptimalSlate(const BeliefMap& beliefs, const TruthMap& truths,
                                 const SignalModel& signal,
                                 const UtilityFunction& u, int k,
                                 std::span<const MovieId> candidates,
                                 const MonteCarloOptions& options) {
  std::vector<MovieId> pool(candidates.begin(), candidates.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (k < 1 || static_cast<std::size_t>(k) > pool.size()) {
    throw std::invalid_argument("slate size k=" + std::to_string(k) +
                                " not in [1, " + std::to_string(pool.size()) +
                                "]");
  }

  // Lexicographic enumeration of index combinations.
  std::vector<std::size_t> idx(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<MovieId> best_slate;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<MovieId> slate(idx.size());
  const std::size_t n = pool.size();
  while (true) {
    for (std::size_t i = 0; i < idx.size(); ++i) slate[i] = pool[idx[i]];
    const double v =
        ExpectedMaximizedUtility(beliefs, slate, truths, signal, u, options).mean;
    if (v > best_value) {
      best_value = v;
      best_slate = slate;
    }
    std::size_t i = idx.size();
    while (i > 0 && idx[i - 1] == n - idx.size() + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < idx.size(); ++j) idx[j] = idx[j - 1] + 1;
  }
  return RecommendationSlate{best_slate, std::nullopt};
}

}  // namespace elicit
