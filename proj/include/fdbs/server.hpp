// Copyright 2026 The fdbs Authors.
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

// HTTP transport for an ApiHandler. The body is the handler's JSON exactly;
// the source trace goes in a response header.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "fdbs/api.hpp"

namespace fdbs::server {

class HttpServer {
 public:
  explicit HttpServer(api::ApiHandler handler);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Throws StartupFailure when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until stop() from another thread (serve command). `on_bound`
  // runs once the port is bound.
  void run(const std::string& host, int port,
           const std::function<void()>& on_bound = {});
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

struct HttpResult {
  int status = 0;
  std::string body;
  std::string source;  // raw header value
};

// Throws ServiceUnavailable when the connection fails.
HttpResult http_request(const std::string& host, int port,
                        const api::ApiRequest& request);

// Query-string encoding with sorted keys.
std::string encode_query(const std::map<std::string, std::string>& params);

}  // namespace fdbs::server
