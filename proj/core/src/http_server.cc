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

#include "elicit/http_server.h"

#include <charconv>
#include <optional>
#include <regex>

#include <nlohmann/json.hpp>

#include "httplib.h"

namespace elicit {
namespace {

using nlohmann::json;

HttpResponse Json(int status, const json& body) {
  return {status, body.dump(), {}};
}

HttpResponse Error(int status, const std::string& message) {
  return Json(status, {{"error", message}});
}

std::optional<std::int64_t> ToInt(const std::string& text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<std::string> Bearer(const HttpRequest& req) {
  auto it = req.headers.find("authorization");
  if (it == req.headers.end()) return std::nullopt;
  constexpr std::string_view kPrefix = "Bearer ";
  if (it->second.rfind(kPrefix, 0) != 0) return std::nullopt;
  return it->second.substr(kPrefix.size());
}

json BatchJson(const BatchView& v) {
  json slots = json::array();
  for (const auto& s : v.slots) {
    slots.push_back({{"movieId", s.movie},
                     {"title", s.title},
                     {"source", SourceName(s.source)},
                     {"answered", s.answered}});
  }
  json out = {{"batchId", v.batch_id},
              {"userId", v.user},
              {"createdAt", v.created_at},
              {"slots", slots}};
  if (v.shortfall_reason) out["shortfall"] = *v.shortfall_reason;
  return out;
}

json BeliefJson(const BeliefRecord& r) {
  json out = {{"timestamp", r.timestamp},
              {"userId", r.user},
              {"movieId", r.movie},
              {"isSeen", r.is_seen}};
  if (r.elicit_rating) out["userElicitRating"] = r.elicit_rating->stars();
  if (r.watch_date) out["watchDate"] = FormatDate(*r.watch_date);
  if (r.predict_rating) out["userPredictRating"] = r.predict_rating->stars();
  if (r.certainty) out["userCertainty"] = *r.certainty;
  return out;
}

BeliefSubmission ParseSubmission(const std::string& body) {
  const json j = json::parse(body);
  if (!j.is_object()) throw ServiceError(422, "body must be a JSON object");
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key) || j.at(key).is_null()) {
      throw ServiceError(422, std::string("missing field ") + key);
    }
    return j.at(key);
  };
  auto rating = [&](const char* key) -> std::optional<Rating> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_number()) throw ServiceError(422, std::string(key) + " must be a number");
    try {
      return Rating::FromStars(j.at(key).get<double>());
    } catch (const std::invalid_argument& e) {
      throw ServiceError(422, std::string(key) + ": " + e.what());
    }
  };
  BeliefSubmission s;
  const json& movie = need("movieId");
  const json& batch = need("batchId");
  const json& seen = need("isSeen");
  if (!movie.is_number_integer() || !batch.is_string() || !seen.is_number_integer()) {
    throw ServiceError(422, "movieId and isSeen must be integers, batchId a string");
  }
  s.movie = movie.get<MovieId>();
  s.batch_id = batch.get<std::string>();
  s.is_seen = seen.get<int>();
  s.elicit_rating = rating("userElicitRating");
  s.predict_rating = rating("userPredictRating");
  if (j.contains("userCertainty") && !j.at("userCertainty").is_null()) {
    if (!j.at("userCertainty").is_number_integer()) {
      throw ServiceError(422, "userCertainty must be an integer");
    }
    s.certainty = j.at("userCertainty").get<int>();
  }
  if (j.contains("watchDate") && !j.at("watchDate").is_null()) {
    if (!j.at("watchDate").is_string()) throw ServiceError(422, "watchDate must be a string");
    try {
      s.watch_date = ParseDate(j.at("watchDate").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ServiceError(422, std::string("watchDate: ") + e.what());
    }
  }
  return s;
}

HttpResponse Route(ElicitationService& service, const HttpRequest& req) {
  if (req.method == "OPTIONS") return {204, "", {}};
  if (req.method == "GET" && req.path == "/healthz") return Json(200, {{"status", "ok"}});

  if (req.path == "/admin/pool/rebuild") {
    if (req.method != "POST") return Error(405, "method not allowed");
    std::string token = Bearer(req).value_or("");
    if (auto it = req.headers.find("x-admin-token"); it != req.headers.end()) {
      token = it->second;
    }
    const PoolSummary p = service.RebuildPool(token);
    return Json(200, {{"month", FormatMonth(p.month)},
                      {"size", p.size},
                      {"rebuilt", p.rebuilt}});
  }

  static const std::regex kUserRoute(R"(/users/(\d+)/([a-z-]+))");
  std::smatch m;
  if (!std::regex_match(req.path, m, kUserRoute)) return Error(404, "not found");
  const auto user = ToInt(m[1].str());
  if (!user || *user <= 0) return Error(404, "unknown user");
  const std::string action = m[2].str();

  const bool known = action == "elicitation-batch" || action == "beliefs" ||
                     action == "top-picks";
  if (!known) return Error(404, "not found");
  const bool post = action == "beliefs";
  if ((post && req.method != "POST") || (!post && req.method != "GET")) {
    return Error(405, "method not allowed");
  }

  const auto issued = service.Authenticate(*user, Bearer(req));
  HttpResponse res;
  if (action == "elicitation-batch") {
    auto it = req.params.find("refresh");
    const bool refresh = it != req.params.end() && (it->second == "1" || it->second == "true");
    json body = BatchJson(service.GetBatch(*user, refresh));
    if (issued) body["token"] = *issued;
    res = Json(200, body);
  } else if (action == "beliefs") {
    BeliefSubmission sub;
    try {
      sub = ParseSubmission(req.body);
    } catch (const json::exception& e) {
      return Error(400, std::string("malformed JSON: ") + e.what());
    }
    json body = {{"status", "created"}, {"belief", BeliefJson(service.SubmitBelief(*user, sub))}};
    if (issued) body["token"] = *issued;
    res = Json(201, body);
  } else {
    std::size_t k = 10;
    if (auto it = req.params.find("k"); it != req.params.end()) {
      const auto v = ToInt(it->second);
      if (!v || *v <= 0 || *v > 100) return Error(422, "k must be in 1..100");
      k = static_cast<std::size_t>(*v);
    }
    json movies = json::array();
    for (const auto& p : service.TopPicks(*user, k)) {
      movies.push_back({{"position", p.position},
                        {"movieId", p.movie},
                        {"title", p.title},
                        {"predictedRating", p.predicted.stars()}});
    }
    json body = {{"userId", *user}, {"movies", movies}};
    if (issued) body["token"] = *issued;
    res = Json(200, body);
  }
  if (issued) res.headers.emplace_back("X-User-Token", *issued);
  return res;
}

}  // namespace

HttpResponse Dispatch(ElicitationService& service, const HttpRequest& request) {
  HttpResponse res;
  try {
    res = Route(service, request);
  } catch (const ServiceError& e) {
    res = Error(e.status(), e.what());
    if (e.status() == 503) res.headers.emplace_back("Retry-After", "60");
  } catch (const std::exception& e) {
    res = Error(500, e.what());
  }
  res.headers.emplace_back("Access-Control-Allow-Origin", "*");
  res.headers.emplace_back("Access-Control-Allow-Headers",
                           "Authorization, Content-Type, X-Admin-Token");
  res.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  res.headers.emplace_back("Access-Control-Expose-Headers", "X-User-Token");
  return res;
}

struct HttpServer::Impl {
  ElicitationService& service;
  httplib::Server server;

  explicit Impl(ElicitationService& s) : service(s) {
    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
      HttpRequest req;
      req.method = in.method;
      req.path = in.path;
      for (const auto& [k, v] : in.params) req.params.emplace(k, v);
      for (const auto& [k, v] : in.headers) {
        std::string key = k;
        for (auto& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        req.headers.emplace(std::move(key), v);
      }
      req.body = in.body;
      const HttpResponse res = Dispatch(service, req);
      out.status = res.status;
      for (const auto& [k, v] : res.headers) out.set_header(k, v);
      if (!res.body.empty()) out.set_content(res.body, "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Options(".*", handler);
  }
};

HttpServer::HttpServer(ElicitationService& service)
    : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                              : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::Listen() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() { impl_->server.stop(); }

}  // namespace elicit
