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

#include "elicit/simulator.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "elicit/choice_model.h"
#include "elicit/csv.h"
#include "elicit/pool.h"
#include "elicit/sampler.h"

namespace elicit {
namespace {

struct Field {
  const char* name;
  std::function<void(SimConfig&, std::string_view)> set;
  std::function<std::string(const SimConfig&)> get;
};

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
T ParseNumber(std::string_view text, const char* name) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument(std::string("bad value for ") + name + ": " +
                                std::string(text));
  }
  return value;
}

template <typename T>
Field MakeField(const char* name, T SimConfig::*member) {
  Field f{name, nullptr, nullptr};
  if constexpr (std::is_same_v<T, Date>) {
    f.set = [member](SimConfig& c, std::string_view v) { c.*member = ParseDate(v); };
    f.get = [member](const SimConfig& c) { return FormatDate(c.*member); };
  } else if constexpr (std::is_same_v<T, double>) {
    f.set = [member, name](SimConfig& c, std::string_view v) {
      c.*member = ParseNumber<double>(v, name);
    };
    f.get = [member](const SimConfig& c) { return FormatDouble(c.*member); };
  } else {
    f.set = [member, name](SimConfig& c, std::string_view v) {
      c.*member = ParseNumber<T>(v, name);
    };
    f.get = [member](const SimConfig& c) { return std::to_string(c.*member); };
  }
  return f;
}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      MakeField("num_users", &SimConfig::num_users),
      MakeField("num_movies", &SimConfig::num_movies),
      MakeField("horizon_days", &SimConfig::horizon_days),
      MakeField("y", &SimConfig::y),
      MakeField("seed", &SimConfig::seed),
      MakeField("start_date", &SimConfig::start_date),
      MakeField("beta_a", &SimConfig::beta_a),
      MakeField("beta_b", &SimConfig::beta_b),
      MakeField("response_scale", &SimConfig::response_scale),
      MakeField("rec_response_multiplier", &SimConfig::rec_response_multiplier),
      MakeField("beta0", &SimConfig::beta0),
      MakeField("beta1", &SimConfig::beta1),
      MakeField("beta2", &SimConfig::beta2),
      MakeField("signal_sd", &SimConfig::signal_sd),
      MakeField("rec_slate_size", &SimConfig::rec_slate_size),
      MakeField("rec_noise", &SimConfig::rec_noise),
      MakeField("visit_prob", &SimConfig::visit_prob),
      MakeField("latent_dim", &SimConfig::latent_dim),
      MakeField("factor_mean", &SimConfig::factor_mean),
      MakeField("factor_sd", &SimConfig::factor_sd),
      MakeField("value_noise", &SimConfig::value_noise),
      MakeField("prior_bias_sd", &SimConfig::prior_bias_sd),
      MakeField("prior_sd_min", &SimConfig::prior_sd_min),
      MakeField("prior_sd_max", &SimConfig::prior_sd_max),
      MakeField("prior_sd_jitter", &SimConfig::prior_sd_jitter),
      MakeField("background_max_ratings", &SimConfig::background_max_ratings),
      MakeField("zipf_exponent", &SimConfig::zipf_exponent),
      MakeField("recent_release_fraction", &SimConfig::recent_release_fraction),
      MakeField("initial_rated_mean", &SimConfig::initial_rated_mean),
      MakeField("seen_unrated_mean", &SimConfig::seen_unrated_mean),
  };
  return fields;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

void Require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid sim config: ") + what);
}

std::mt19937_64 Stream(std::uint64_t seed, std::int64_t key, int purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(key) >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

enum StreamPurpose : int {
  kUserSpawn = 1,
  kMovieSpawn = 2,
  kCatalog = 3,
  kUserHistory = 4,
  kUserDays = 5,
};

double SampleBeta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x + y > 0 ? x / (x + y) : 0.0;
}

}  // namespace

void SimConfig::Validate() const {
  Require(num_users > 0, "num_users must be positive");
  Require(num_movies > 0, "num_movies must be positive");
  Require(horizon_days > 0, "horizon_days must be positive");
  Require(y > 0, "y must be positive");
  Require(beta_a > 0 && beta_b > 0, "beta_a and beta_b must be positive");
  Require(response_scale >= 0 && rec_response_multiplier >= 0,
          "response multipliers must be non-negative");
  Require(signal_sd > 0, "signal_sd must be positive");
  Require(rec_slate_size > 0, "rec_slate_size must be positive");
  Require(rec_noise >= 0, "rec_noise must be non-negative");
  Require(visit_prob >= 0 && visit_prob <= 1, "visit_prob must be in [0, 1]");
  Require(latent_dim > 0, "latent_dim must be positive");
  Require(factor_sd >= 0 && value_noise >= 0 && prior_bias_sd >= 0 &&
              prior_sd_jitter >= 0,
          "noise scales must be non-negative");
  Require(prior_sd_min > 0 && prior_sd_max >= prior_sd_min,
          "need 0 < prior_sd_min <= prior_sd_max");
  Require(background_max_ratings >= 0, "background_max_ratings must be >= 0");
  Require(zipf_exponent >= 0, "zipf_exponent must be non-negative");
  Require(recent_release_fraction >= 0 && recent_release_fraction <= 1,
          "recent_release_fraction must be in [0, 1]");
  Require(initial_rated_mean >= 0 && seen_unrated_mean >= 0,
          "history means must be non-negative");
}

SimConfig ParseSimConfig(std::string_view text) {
  SimConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config", line_no, "expected key=value");
    }
    const auto key = Trim(line.substr(0, eq));
    const auto value = Trim(line.substr(eq + 1));
    const auto& fields = Fields();
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const Field& f) { return key == f.name; });
    if (it == fields.end()) {
      throw FormatError("config", line_no, "unknown key " + std::string(key));
    }
    try {
      it->set(config, value);
    } catch (const std::invalid_argument& e) {
      throw FormatError("config", line_no, e.what());
    }
  }
  config.Validate();
  return config;
}

SimConfig ReadSimConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ParseSimConfig(text.str());
}

std::string FormatSimConfig(const SimConfig& config) {
  std::string out;
  for (const auto& f : Fields()) {
    out += f.name;
    out += '=';
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::string SimConfigHash(const SimConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : FormatSimConfig(config)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int Population::Certainty(double sd) const {
  const double precision = 1.0 / sd;
  int c = 1;
  for (double cut : certainty_cuts) c += precision > cut;
  return c;
}

Population SpawnPopulation(const SimConfig& config) {
  config.Validate();
  Population p;
  p.num_users = config.num_users;
  p.num_movies = config.num_movies;
  p.latent_dim = config.latent_dim;
  const int d = config.latent_dim;
  const auto users = static_cast<std::size_t>(config.num_users);
  const auto movies = static_cast<std::size_t>(config.num_movies);

  p.item_factors.resize(movies * static_cast<std::size_t>(d));
  p.popularity_rank.resize(movies);
  {
    auto rng = Stream(config.seed, 0, kMovieSpawn);
    std::normal_distribution<double> factor(config.factor_mean, config.factor_sd);
    for (auto& v : p.item_factors) v = factor(rng);
    std::vector<int> order(movies);
    for (std::size_t j = 0; j < movies; ++j) order[j] = static_cast<int>(j);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < movies; ++r) {
      p.popularity_rank[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
    }
  }

  p.user_factors.resize(users * static_cast<std::size_t>(d));
  p.truth.resize(users * movies);
  p.prior_mean.resize(users * movies);
  p.prior_sd.resize(users * movies);
  p.rho.resize(users);
  const double rank_span = movies > 1 ? static_cast<double>(movies - 1) : 1.0;
  for (std::size_t i = 0; i < users; ++i) {
    auto rng = Stream(config.seed, static_cast<std::int64_t>(i + 1), kUserSpawn);
    std::normal_distribution<double> factor(config.factor_mean, config.factor_sd);
    std::normal_distribution<double> z(0.0, 1.0);
    double* u = &p.user_factors[i * static_cast<std::size_t>(d)];
    for (int k = 0; k < d; ++k) u[k] = factor(rng);
    p.rho[i] = std::clamp(
        config.response_scale * SampleBeta(config.beta_a, config.beta_b, rng),
        0.0, 1.0);
    for (std::size_t j = 0; j < movies; ++j) {
      const double* v = &p.item_factors[j * static_cast<std::size_t>(d)];
      double x = 0.0;
      for (int k = 0; k < d; ++k) x += u[k] * v[k];
      x = std::clamp(x + config.value_noise * z(rng), 0.5, 5.0);
      const double frac = p.popularity_rank[j] / rank_span;
      const double sd =
          (config.prior_sd_min + (config.prior_sd_max - config.prior_sd_min) * frac) *
          std::exp(config.prior_sd_jitter * z(rng));
      const std::size_t at = i * movies + j;
      p.truth[at] = static_cast<float>(x);
      p.prior_mean[at] = static_cast<float>(x + config.prior_bias_sd * z(rng));
      p.prior_sd[at] = static_cast<float>(sd);
    }
  }

  // Quintile cuts of 1/sd over a strided sample of the population.
  std::vector<double> precision;
  const std::size_t total = users * movies;
  const std::size_t stride = std::max<std::size_t>(1, total / 200000);
  for (std::size_t at = 0; at < total; at += stride) {
    precision.push_back(1.0 / p.prior_sd[at]);
  }
  for (int q = 0; q < 4; ++q) {
    const auto k = static_cast<std::size_t>(
        static_cast<double>(precision.size()) * (q + 1) / 5.0);
    std::nth_element(precision.begin(),
                     precision.begin() + static_cast<std::ptrdiff_t>(
                                             std::min(k, precision.size() - 1)),
                     precision.end());
    p.certainty_cuts[static_cast<std::size_t>(q)] =
        precision[std::min(k, precision.size() - 1)];
  }
  return p;
}

namespace {

// Genre frequencies loosely shaped like a general-audience catalog.
constexpr std::array<double, kNumGenres> kGenreWeights = {
    8, 4, 3, 1, 2, 9, 3, 4, 16, 4, 3, 7, 1, 7, 5, 2, 2, 1};

enum : std::uint8_t { kRated = 1, kSeen = 2, kAnswered = 4 };

class BeliefPredictor final : public PredictedRatings {
 public:
  BeliefPredictor(const float* means, int num_movies)
      : means_(means), num_movies_(num_movies) {}
  std::optional<Rating> Predict(UserId, MovieId movie) const override {
    if (movie < 1 || movie > num_movies_) return std::nullopt;
    return Rating::Nearest(means_[movie - 1]);
  }
  std::string_view provider() const override { return "sim-beliefs"; }

 private:
  const float* means_;
  int num_movies_;
};

std::vector<Movie> GenerateMovies(const SimConfig& config, std::mt19937_64& rng) {
  const UnixSeconds start = StartOfDay(config.start_date);
  const Date recent_from = AddMonths(config.start_date, -6);
  const Date old_from = Date{std::chrono::year{1970}, std::chrono::January,
                             std::chrono::day{1}};
  const auto old_days = (StartOfDay(recent_from) - StartOfDay(old_from)) / kSecondsPerDay;
  const auto recent_days =
      (start - StartOfDay(recent_from)) / kSecondsPerDay + config.horizon_days;
  std::discrete_distribution<int> genre(kGenreWeights.begin(), kGenreWeights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Movie> movies(static_cast<std::size_t>(config.num_movies));
  for (std::size_t j = 0; j < movies.size(); ++j) {
    Movie& m = movies[j];
    m.id = static_cast<MovieId>(j + 1);
    m.title = "Title " + std::to_string(m.id);
    const int n = 1 + static_cast<int>(unit(rng) * 3.0);
    for (int k = 0; k < n; ++k) m.genres.set(static_cast<std::size_t>(genre(rng)));
    if (unit(rng) < config.recent_release_fraction) {
      m.release_date = AddDays(
          recent_from, static_cast<int>(unit(rng) * static_cast<double>(recent_days)));
    } else {
      m.release_date = AddDays(
          old_from, static_cast<int>(unit(rng) * static_cast<double>(old_days)));
    }
  }
  return movies;
}

template <typename R>
void SortLog(std::vector<R>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const R& a, const R& b) {
    return std::tie(a.timestamp, a.user, a.movie) <
           std::tie(b.timestamp, b.user, b.movie);
  });
}

}  // namespace

SimLogs RunSimulation(const SimConfig& config) {
  return RunSimulation(config, SpawnPopulation(config));
}

SimLogs RunSimulation(const SimConfig& config, const Population& pop) {
  config.Validate();
  if (pop.num_users != config.num_users || pop.num_movies != config.num_movies) {
    throw std::invalid_argument("population does not match the config");
  }
  const int M = pop.num_movies;
  const int d = pop.latent_dim;
  const UnixSeconds start = StartOfDay(config.start_date);
  const UnixSeconds end = start + static_cast<UnixSeconds>(config.horizon_days) * kSecondsPerDay;

  SimLogs logs;
  auto catalog_rng = Stream(config.seed, 0, kCatalog);
  logs.movies = GenerateMovies(config, catalog_rng);

  std::vector<double> zipf(static_cast<std::size_t>(M));
  for (int j = 0; j < M; ++j) {
    zipf[static_cast<std::size_t>(j)] =
        std::pow(pop.popularity_rank[static_cast<std::size_t>(j)] + 1.0,
                 -config.zipf_exponent);
  }

  // Ratings by users outside the simulated population.
  std::vector<RatingEvent> background;
  {
    std::normal_distribution<double> noise(0.0, 0.8);
    for (int j = 0; j < M; ++j) {
      const Movie& m = logs.movies[static_cast<std::size_t>(j)];
      const auto count = static_cast<std::int64_t>(
          std::floor(config.background_max_ratings * zipf[static_cast<std::size_t>(j)]));
      double quality = 0.0;
      for (int k = 0; k < d; ++k) {
        quality += config.factor_mean * pop.item_factors[static_cast<std::size_t>(j * d + k)];
      }
      const UnixSeconds from =
          std::max(StartOfDay(*m.release_date), start - 730 * kSecondsPerDay);
      if (from >= end) continue;
      std::uniform_int_distribution<UnixSeconds> when(from, end - 1);
      for (std::int64_t r = 0; r < count; ++r) {
        RatingEvent e;
        e.user = 100000 + (static_cast<std::int64_t>(j) * 7919 + r) % 50000;
        e.movie = m.id;
        e.rating = Rating::Nearest(quality + noise(catalog_rng));
        e.timestamp = when(catalog_rng);
        background.push_back(e);
      }
    }
  }

  std::vector<RatingEvent>& ratings = logs.ratings;
  ratings = background;
  std::vector<std::uint8_t> status(static_cast<std::size_t>(config.num_users) *
                                   static_cast<std::size_t>(M));
  std::vector<Date> watch_dates(status.size());
  std::vector<float> mean(pop.prior_mean);
  std::vector<float> sd(pop.prior_sd);

  // Ratings and seen-but-unrated movies from before the horizon.
  std::vector<int> released_before;
  std::vector<double> released_weights;
  for (int j = 0; j < M; ++j) {
    if (StartOfDay(*logs.movies[static_cast<std::size_t>(j)].release_date) < start) {
      released_before.push_back(j);
      released_weights.push_back(zipf[static_cast<std::size_t>(j)]);
    }
  }
  for (int i = 0; i < config.num_users && !released_before.empty(); ++i) {
    auto rng = Stream(config.seed, i + 1, kUserHistory);
    std::discrete_distribution<std::size_t> pick(released_weights.begin(),
                                                 released_weights.end());
    std::poisson_distribution<int> rated_n(config.initial_rated_mean);
    std::poisson_distribution<int> seen_n(config.seen_unrated_mean);
    std::uniform_int_distribution<UnixSeconds> past(start - 365 * kSecondsPerDay,
                                                    start - 1);
    const int want_rated = rated_n(rng);
    const int want_seen = seen_n(rng);
    const auto max_take = released_before.size();
    auto take = [&](int want, std::uint8_t flag) {
      int got = 0;
      for (int attempt = 0; got < want && attempt < want * 20; ++attempt) {
        if (static_cast<std::size_t>(got) >= max_take) break;
        const int j = released_before[pick(rng)];
        const std::size_t at = pop.At(i, j);
        if (status[at] != 0) continue;
        status[at] = flag;
        const UnixSeconds ts = std::max(
            past(rng),
            StartOfDay(*logs.movies[static_cast<std::size_t>(j)].release_date));
        if (flag == kRated) {
          ratings.push_back({i + 1, j + 1, Rating::Nearest(pop.truth[at]), ts});
        } else {
          watch_dates[at] = DateOf(ts);
        }
        ++got;
      }
    };
    take(want_rated, kRated);
    take(want_seen, kSeen);
  }

  PoolConfig pool_config;
  pool_config.y = config.y;
  pool_config.rng_seed = config.seed;
  PoolSchedule schedule([&](const Date& clock_date) {
    std::vector<RatingEvent> known;
    const UnixSeconds cutoff = EndOfDay(clock_date);
    for (const auto& e : ratings) {
      if (e.timestamp <= cutoff) known.push_back(e);
    }
    const auto catalog = Catalog::Build(logs.movies, std::move(known));
    const auto snapshot = CatalogSnapshot::Compute(catalog, clock_date);
    return BuildPool(snapshot, ComputeGenreShares(snapshot), pool_config);
  });

  std::vector<std::mt19937_64> user_rng;
  user_rng.reserve(static_cast<std::size_t>(config.num_users));
  for (int i = 0; i < config.num_users; ++i) {
    user_rng.push_back(Stream(config.seed, i + 1, kUserDays));
  }

  ElicitationHistory history;
  const SignalModel signal{config.signal_sd};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(static_cast<std::size_t>(M));

  for (int day = 0; day < config.horizon_days; ++day) {
    const Date today = AddDays(config.start_date, day);
    std::shared_ptr<const ElicitationPool> pool;
    try {
      pool = schedule.Get(today);
    } catch (const std::invalid_argument&) {
      pool = nullptr;
    }
    std::vector<std::uint8_t> released(static_cast<std::size_t>(M));
    std::vector<std::uint8_t> recent(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
      const auto& release = logs.movies[static_cast<std::size_t>(j)].release_date;
      released[static_cast<std::size_t>(j)] = *release <= today;
      recent[static_cast<std::size_t>(j)] = IsRecentRelease(release, today);
    }

    for (int i = 0; i < config.num_users; ++i) {
      auto& rng = user_rng[static_cast<std::size_t>(i)];
      const UserId user = i + 1;
      if (unit(rng) >= config.visit_prob) continue;
      const UnixSeconds t0 = StartOfDay(today) + 8 * 3600 + (i * 37) % 43200;
      const std::size_t row = pop.At(i, 0);

      // Top picks: noisy-greedy on current belief means.
      scored.clear();
      for (int j = 0; j < M; ++j) {
        if ((status[row + static_cast<std::size_t>(j)] & kRated) ||
            !released[static_cast<std::size_t>(j)]) {
          continue;
        }
        scored.emplace_back(mean[row + static_cast<std::size_t>(j)] +
                                config.rec_noise * z(rng),
                            j);
      }
      const std::size_t depth = std::min(scored.size(), kTopPicksDepth);
      std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(depth),
                        scored.end(), [](const auto& a, const auto& b) {
                          return a.first > b.first ||
                                 (a.first == b.first && a.second < b.second);
                        });
      std::vector<MovieId> top_picks;
      for (std::size_t r = 0; r < depth; ++r) top_picks.push_back(scored[r].second + 1);

      const std::size_t k =
          std::min(top_picks.size(), static_cast<std::size_t>(config.rec_slate_size));
      if (k > 0) {
        RecommendationSlate slate;
        BeliefMap beliefs;
        TruthMap truths;
        for (std::size_t r = 0; r < k; ++r) {
          const MovieId m = top_picks[r];
          const std::size_t at = row + static_cast<std::size_t>(m - 1);
          slate.movies.push_back(m);
          beliefs.emplace(m, GoodBelief::Normal(mean[at], sd[at]));
          truths.emplace(m, pop.truth[at]);
          logs.recommendations.push_back({t0, user, static_cast<int>(r + 1), m});
        }
        const BeliefMap updated = UpdateBeliefs(beliefs, slate, truths, signal, rng);
        for (const auto& [m, belief] : updated) {
          const std::size_t at = row + static_cast<std::size_t>(m - 1);
          mean[at] = static_cast<float>(belief.gaussian().mean);
          sd[at] = static_cast<float>(belief.gaussian().sd);
        }
      }

      if (!pool) continue;
      const BeliefPredictor predictor(&mean[row], M);
      SamplerInputs inputs;
      inputs.pool = pool.get();
      inputs.has_rated = [&](MovieId m) {
        return (status[row + static_cast<std::size_t>(m - 1)] & (kRated | kAnswered)) != 0;
      };
      inputs.is_recent = [&](MovieId m) {
        return recent[static_cast<std::size_t>(m - 1)] != 0;
      };
      inputs.history = &history;
      inputs.predicted = &predictor;
      inputs.top_picks = top_picks;
      const UnixSeconds t1 = t0 + 60;
      const auto batch = SampleBatch(
          user, t1, "s" + std::to_string(user) + "-" + std::to_string(day), inputs, rng);

      for (std::size_t s = 0; s < batch.slots.size(); ++s) {
        const auto& slot = batch.slots[s];
        const MovieId m = slot.movie;
        const std::size_t at = row + static_cast<std::size_t>(m - 1);
        history.RecordPresentation(user, m, t1);
        logs.requests.push_back({t1, user, m, slot.source, batch.id});

        const UnixSeconds t = t1 + 60 + 10 * static_cast<UnixSeconds>(s);
        const bool seen = (status[at] & kSeen) != 0;
        const Rating predicted = Rating::Nearest(mean[at]);
        const int certainty = pop.Certainty(sd[at]);
        const double p_respond =
            pop.rho[static_cast<std::size_t>(i)] *
            (slot.source == SlotSource::kRec ? config.rec_response_multiplier : 1.0);
        BeliefRecord belief;
        belief.timestamp = t;
        belief.user = user;
        belief.movie = m;
        if (unit(rng) < p_respond) {
          history.RecordResponse(user, m, t);
          if (seen) {
            belief.is_seen = 1;
            belief.elicit_rating = Rating::Nearest(pop.truth[at]);
            belief.watch_date = watch_dates[at];
            ratings.push_back({user, m, *belief.elicit_rating, t});
            status[at] |= kRated;
          } else {
            belief.is_seen = 0;
            belief.predict_rating = predicted;
            belief.certainty = certainty;
            status[at] |= kAnswered;
          }
        }
        logs.beliefs.push_back(belief);

        if (seen || (status[at] & kRated)) continue;
        const double p_consume =
            std::clamp(config.beta0 + config.beta1 * predicted.stars() +
                           config.beta2 * (6.0 - certainty),
                       0.0, 1.0);
        if (unit(rng) < p_consume) {
          const UnixSeconds tc = t + 3600;
          ratings.push_back({user, m, Rating::Nearest(pop.truth[at]), tc});
          logs.consumption.push_back({tc, user, m});
          status[at] |= kRated;
        }
      }
    }
  }
  logs.pool_builds = schedule.builds();

  SortLog(logs.ratings);
  SortLog(logs.beliefs);
  SortLog(logs.requests);
  SortLog(logs.consumption);
  std::stable_sort(logs.recommendations.begin(), logs.recommendations.end(),
                   [](const auto& a, const auto& b) {
                     return std::tie(a.timestamp, a.user, a.position) <
                            std::tie(b.timestamp, b.user, b.position);
                   });
  return logs;
}

void WriteSimLogs(const SimLogs& logs, const SimConfig& config,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteMoviesCsv(logs.movies, dir / kMoviesFile);
  WriteRatings(logs.ratings, dir / kRatingsFile);
  WriteBeliefs(logs.beliefs, dir / kBeliefsFile);
  WriteElicitLog(logs.requests, dir / kElicitLogFile);
  WriteRecLog(logs.recommendations, dir / kRecLogFile);
  WriteConsumption(logs.consumption, dir / kConsumptionFile);

  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << "config_hash=" << SimConfigHash(config) << '\n';
  out << "pool_builds=" << logs.pool_builds << '\n';
  out << kMoviesFile << '=' << logs.movies.size() << '\n';
  out << kRatingsFile << '=' << logs.ratings.size() << '\n';
  out << kBeliefsFile << '=' << logs.beliefs.size() << '\n';
  out << kElicitLogFile << '=' << logs.requests.size() << '\n';
  out << kRecLogFile << '=' << logs.recommendations.size() << '\n';
  out << kConsumptionFile << '=' << logs.consumption.size() << '\n';
  out << FormatSimConfig(config);
  if (!out) throw std::runtime_error("failed writing manifest in " + dir.string());
}

}  // namespace elicit
