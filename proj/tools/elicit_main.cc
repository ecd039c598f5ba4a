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

// Command line front end: pool building, batch sampling, choice-model
// evaluation, simulation, analysis, corpus validation and the HTTP service.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "elicit/analytics.h"
#include "elicit/catalog.h"
#include "elicit/choice_model.h"
#include "elicit/csv.h"
#include "elicit/dataset_io.h"
#include "elicit/http_server.h"
#include "elicit/pool.h"
#include "elicit/sampler.h"
#include "elicit/service.h"
#include "elicit/simulator.h"

namespace {

using namespace elicit;
namespace fs = std::filesystem;

std::string EnvOr(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

Catalog LoadCatalog(const fs::path& dir) {
  return Catalog::Ingest(dir / kMoviesFile, dir / kRatingsFile);
}

// "power:0.5", "exp:2", "linear".
UtilityFunction ParseUtility(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const double param = colon == std::string::npos ? 0.0 : std::stod(text.substr(colon + 1));
  if (kind == "linear") return UtilityFunction::Linear();
  if (kind == "power") return UtilityFunction::Power(param);
  if (kind == "exp") return UtilityFunction::Exponential(param);
  throw std::invalid_argument("unknown utility " + text);
}

// "movie:mean:sd" and "movie:value".
std::vector<double> SplitNumbers(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(':', start);
    out.push_back(std::stod(text.substr(start, end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

struct ChoiceArgs {
  std::vector<std::string> beliefs;
  std::vector<std::string> truths;
  std::vector<MovieId> slate;
  std::string utility = "linear";
  double signal_sd = 1.0;
  int draws = 2000;
  std::uint64_t seed = 0x5eed;
  int k = 1;
};

void LoadChoice(const ChoiceArgs& a, BeliefMap* beliefs, TruthMap* truths) {
  for (const auto& b : a.beliefs) {
    const auto v = SplitNumbers(b);
    if (v.size() != 3) throw std::invalid_argument("belief must be movie:mean:sd");
    beliefs->insert_or_assign(static_cast<MovieId>(v[0]), GoodBelief::Normal(v[1], v[2]));
  }
  for (const auto& t : a.truths) {
    const auto v = SplitNumbers(t);
    if (v.size() != 2) throw std::invalid_argument("truth must be movie:value");
    truths->insert_or_assign(static_cast<MovieId>(v[0]), v[1]);
  }
  // Unspecified truths default to the belief mean.
  for (const auto& [m, b] : *beliefs) truths->try_emplace(m, b.mean());
}

int RunChoiceEval(const ChoiceArgs& a) {
  BeliefMap beliefs;
  TruthMap truths;
  LoadChoice(a, &beliefs, &truths);
  const UtilityFunction u = ParseUtility(a.utility);
  std::printf("%-10s %12s %12s %12s\n", "movie", "mean", "sd", "E[u]");
  for (const auto& [m, b] : beliefs) {
    std::printf("%-10lld %12.6f %12.6f %12.6f\n", static_cast<long long>(m), b.mean(),
                std::sqrt(b.variance()), ExpectedUtility(b, u));
  }
  std::printf("choice without recommendation: %lld\n",
              static_cast<long long>(ChooseWithoutRecommendation(beliefs, u)));
  std::printf("u*NREC: %.6f\n", MaximizedExpectedUtility(beliefs, u));
  if (!a.slate.empty()) {
    const MonteCarloOptions mc{a.draws, a.seed};
    const SignalModel signal{a.signal_sd};
    const auto rec = ExpectedMaximizedUtility(beliefs, a.slate, truths, signal, u, mc);
    const auto value = PreposteriorValue(beliefs, a.slate, signal, u, mc);
    std::printf("E[u*REC]: %.6f (se %.6f)\n", rec.mean, rec.standard_error);
    std::printf("ex-ante value of slate: %.6f (se %.6f)\n", value.mean,
                value.standard_error);
  }
  return 0;
}

int RunOptSlate(const ChoiceArgs& a) {
  BeliefMap beliefs;
  TruthMap truths;
  LoadChoice(a, &beliefs, &truths);
  std::vector<MovieId> candidates;
  for (const auto& [m, b] : beliefs) candidates.push_back(m);
  const MonteCarloOptions mc{a.draws, a.seed};
  const SignalModel signal{a.signal_sd};
  const UtilityFunction u = ParseUtility(a.utility);
  const auto slate = OptimalSlate(beliefs, truths, signal, u, a.k, candidates, mc);
  const auto value = ExpectedMaximizedUtility(beliefs, slate.movies, truths, signal, u, mc);
  std::printf("%-10s %12s\n", "position", "movie");
  for (std::size_t i = 0; i < slate.movies.size(); ++i) {
    std::printf("%-10zu %12lld\n", i + 1, static_cast<long long>(slate.movies[i]));
  }
  std::printf("E[u*REC]: %.6f (se %.6f)\n", value.mean, value.standard_error);
  return 0;
}

HttpServer* g_server = nullptr;

void OnSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief elicitation toolkit"};
  app.require_subcommand(1);

  // pool build
  auto* pool_cmd = app.add_subcommand("pool", "Elicitation pool operations");
  pool_cmd->require_subcommand(1);
  auto* pool_build = pool_cmd->add_subcommand("build", "Build a monthly pool");
  std::string catalog_dir = ".";
  std::string as_of;
  double y = 11.0;
  std::uint64_t seed = 0;
  std::string out;
  pool_build->add_option("--catalog", catalog_dir, "Directory with movies.csv and ratings.csv");
  pool_build->add_option("--as-of", as_of, "Snapshot date YYYY-MM-DD")->required();
  pool_build->add_option("--y", y, "Pool size multiplier");
  pool_build->add_option("--seed", seed, "Serendipity seed");
  pool_build->add_option("--out", out, "Output CSV (default stdout)");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Draw one elicitation batch");
  std::string data_dir = ".";
  std::string pool_file;
  UserId user = 0;
  sample_cmd->add_option("--data", data_dir, "Directory with movies.csv and ratings.csv");
  sample_cmd->add_option("--pool", pool_file, "Pool CSV (default: build one)");
  sample_cmd->add_option("--user", user, "User id")->required();
  sample_cmd->add_option("--as-of", as_of, "Date YYYY-MM-DD")->required();
  sample_cmd->add_option("--y", y, "Pool size multiplier");
  sample_cmd->add_option("--seed", seed, "Sampler seed");

  // choice eval / opt-slate
  auto* choice_cmd = app.add_subcommand("choice", "Choice model evaluation");
  choice_cmd->require_subcommand(1);
  ChoiceArgs choice;
  auto add_choice = [&](CLI::App* cmd) {
    cmd->add_option("--belief", choice.beliefs, "movie:mean:sd (repeatable)")->required();
    cmd->add_option("--truth", choice.truths, "movie:value (default: belief mean)");
    cmd->add_option("--utility", choice.utility, "linear | power:ALPHA | exp:A");
    cmd->add_option("--signal-sd", choice.signal_sd, "Recommendation signal noise");
    cmd->add_option("--draws", choice.draws, "Monte Carlo draws");
    cmd->add_option("--seed", choice.seed, "Monte Carlo seed");
  };
  auto* choice_eval = choice_cmd->add_subcommand("eval", "Expected utilities and slate value");
  add_choice(choice_eval);
  choice_eval->add_option("--slate", choice.slate, "Recommended movies")->delimiter(',');
  auto* opt_slate = choice_cmd->add_subcommand("opt-slate", "Exhaustive optimal slate");
  add_choice(opt_slate);
  opt_slate->add_option("--k", choice.k, "Slate size");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run the synthetic-user simulator");
  std::string config_file;
  std::string sim_out;
  sim_cmd->add_option("--config", config_file, "key=value config (default: built-in)");
  sim_cmd->add_option("--out", sim_out, "Output directory")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Descriptive statistics and regressions");
  std::string corpus_dir;
  std::string report_prefix;
  analyze_cmd->add_option("--dir", corpus_dir, "Corpus directory")->required();
  analyze_cmd->add_option("--report", report_prefix,
                          "Write PREFIX.txt and PREFIX.kv instead of printing");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a corpus against the schema");
  validate_cmd->add_option("--dir", corpus_dir, "Corpus directory")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the elicitation HTTP service");
  int port = std::stoi(EnvOr("PORT", "8080"));
  std::string serve_dir = EnvOr("DATA_DIR", "data");
  std::string host = "0.0.0.0";
  serve_cmd->add_option("--port", port, "Listen port (env PORT)");
  serve_cmd->add_option("--data", serve_dir, "Data directory (env DATA_DIR)");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--seed", seed, "Sampler seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pool_build->parsed()) {
      const Catalog catalog = LoadCatalog(catalog_dir);
      const auto snapshot = CatalogSnapshot::Compute(catalog, ParseDate(as_of));
      PoolConfig config;
      config.y = y;
      config.rng_seed = seed;
      const auto pool = BuildPool(snapshot, ComputeGenreShares(snapshot), config);
      const fs::path target = out.empty() ? fs::path("/dev/stdout") : fs::path(out);
      WritePoolCsv(pool, target);
      std::fprintf(stderr, "pool %s: %zu movies (bound %lld)\n",
                   FormatMonth(pool.month()).c_str(), pool.size(),
                   static_cast<long long>(PoolSizeBound(y)));
      return 0;
    }
    if (sample_cmd->parsed()) {
      const Catalog catalog = LoadCatalog(data_dir);
      const Date date = ParseDate(as_of);
      const auto snapshot = CatalogSnapshot::Compute(catalog, date);
      ElicitationPool pool;
      if (pool_file.empty()) {
        PoolConfig config;
        config.y = y;
        config.rng_seed = seed;
        pool = BuildPool(snapshot, ComputeGenreShares(snapshot), config);
      } else {
        pool = ReadPoolCsv(pool_file);
      }
      const UnixSeconds now = EndOfDay(date);
      const ItemMeanPredictor predictor(snapshot);
      std::vector<MovieId> candidates;
      for (const auto& m : snapshot.entries()) {
        if (!catalog.HasRated(user, m.movie, now)) candidates.push_back(m.movie);
      }
      const auto top = RankTopPicks(user, candidates, predictor);
      const ElicitationHistory history;
      SamplerInputs inputs;
      inputs.pool = &pool;
      inputs.has_rated = [&](MovieId m) { return catalog.HasRated(user, m, now); };
      inputs.is_recent = [&](MovieId m) {
        const Movie* movie = catalog.FindMovie(m);
        return movie != nullptr && IsRecentRelease(movie->release_date, date);
      };
      inputs.history = &history;
      inputs.predicted = &predictor;
      inputs.top_picks = top;
      std::mt19937_64 rng(seed);
      const auto batch = SampleBatch(user, now, "cli-" + std::to_string(user), inputs, rng);
      std::printf("%-6s %-10s %-8s %s\n", "slot", "movieId", "source", "title");
      for (std::size_t i = 0; i < batch.slots.size(); ++i) {
        const Movie* m = catalog.FindMovie(batch.slots[i].movie);
        std::printf("%-6zu %-10lld %-8s %s\n", i + 1,
                    static_cast<long long>(batch.slots[i].movie),
                    std::string(SourceName(batch.slots[i].source)).c_str(),
                    m ? m->title.c_str() : "");
      }
      if (batch.shortfall_reason) std::printf("note: %s\n", batch.shortfall_reason->c_str());
      return 0;
    }
    if (choice_eval->parsed()) return RunChoiceEval(choice);
    if (opt_slate->parsed()) return RunOptSlate(choice);
    if (sim_cmd->parsed()) {
      const SimConfig config = config_file.empty() ? SimConfig{} : ReadSimConfig(config_file);
      const SimLogs logs = RunSimulation(config);
      WriteSimLogs(logs, config, sim_out);
      std::fprintf(stderr, "wrote %zu requests, %zu belief rows to %s\n",
                   logs.requests.size(), logs.beliefs.size(), sim_out.c_str());
      return 0;
    }
    if (analyze_cmd->parsed()) {
      const AnalysisReport report = AnalyzeCorpus(corpus_dir);
      if (report_prefix.empty()) {
        std::cout << report.ToText();
      } else {
        std::ofstream(report_prefix + ".txt", std::ios::binary) << report.ToText();
        std::ofstream(report_prefix + ".kv", std::ios::binary) << report.ToKeyValue();
      }
      return 0;
    }
    if (validate_cmd->parsed()) {
      const ValidationReport report = ValidateCorpus(corpus_dir);
      std::cout << report.ToText();
      return report.ok() ? 0 : 1;
    }
    if (serve_cmd->parsed()) {
      ServiceOptions options;
      options.data_dir = serve_dir;
      options.admin_token = EnvOr("ADMIN_TOKEN", "");
      options.pool_y = std::stod(EnvOr("POOL_Y", "11"));
      options.seed = seed;
      ElicitationService service(options);
      HttpServer server(service);
      const int bound = server.Bind(host, port);
      std::printf("listening on %s:%d\n", host.c_str(), bound);
      std::fflush(stdout);
      g_server = &server;
      std::signal(SIGINT, OnSignal);
      std::signal(SIGTERM, OnSignal);
      server.Listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
