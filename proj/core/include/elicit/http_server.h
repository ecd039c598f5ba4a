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

#ifndef ELICIT_HTTP_SERVER_H_
#define ELICIT_HTTP_SERVER_H_

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "elicit/service.h"

namespace elicit {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> params;
  // Keys lower-case.
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
  std::vector<std::pair<std::string, std::string>> headers;
};

// Routes one request to the service:
//   GET  /users/{id}/elicitation-batch[?refresh=1]
//   POST /users/{id}/beliefs
//   GET  /users/{id}/top-picks[?k=N]
//   POST /admin/pool/rebuild
//   GET  /healthz
// User routes need `Authorization: Bearer <token>` once the user's token has
// been issued; the issuing response carries it in `X-User-Token`.
HttpResponse Dispatch(ElicitationService& service, const HttpRequest& request);

class HttpServer {
 public:
  explicit HttpServer(ElicitationService& service);
  ~HttpServer();

  // Binds to host:port (0 picks a free port) and returns the bound port.
  int Bind(const std::string& host, int port);
  // Serves until Stop().
  void Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace elicit

#endif  // ELICIT_HTTP_SERVER_H_
