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

#include "fdbs/server.hpp"

#include <httplib.h>

namespace fdbs::server {

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, const api::ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.text(), kJson);
  if (!r.source.empty()) {
    res.set_header(api::kSourceHeader, api::format_source(r.source));
  }
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server http;
  api::ApiHandler handler;

  void serve(const httplib::Request& req, httplib::Response& res) {
    api::ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) {
      if (!request.params.emplace(key, value).second) {
        reply(res, api::error_response(
                       Error(Errc::BadRequest, "repeated parameter: " + key)));
        return;
      }
    }
    try {
      reply(res, handler(request));
    } catch (const Error& e) {
      reply(res, api::error_response(e));
    } catch (const std::exception& e) {
      reply(res, api::error_response(Error(Errc::IoError, e.what())));
    }
  }
};

HttpServer::HttpServer(api::ApiHandler handler) : impl_(new Impl) {
  impl_->handler = std::move(handler);
  auto fn = [this](const httplib::Request& req, httplib::Response& res) {
    impl_->serve(req, res);
  };
  // No SO_REUSEPORT: a second server on a taken port must fail to start.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl_->http.Get(".*", fn);
  impl_->http.Post(".*", fn);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host)
                        : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(Errc::StartupFailure,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port_;
}

void HttpServer::run(const std::string& host, int port,
                     const std::function<void()>& on_bound) {
  if (!impl_->http.bind_to_port(host, port)) {
    throw Error(Errc::StartupFailure,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = port;
  if (on_bound) on_bound();
  impl_->http.listen_after_bind();
}

void HttpServer::stop() {
  impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

std::string encode_query(const std::map<std::string, std::string>& params) {
  httplib::Params p(params.begin(), params.end());
  auto out = httplib::append_query_params("", p);
  return out.empty() ? out : out.substr(1);
}

HttpResult http_request(const std::string& host, int port,
                        const api::ApiRequest& request) {
  httplib::Client client(host, port);
  client.set_connection_timeout(5);
  std::string target = request.path;
  if (!request.params.empty()) target += "?" + encode_query(request.params);
  auto res = request.method == "POST" ? client.Post(target)
                                      : client.Get(target);
  if (!res) {
    throw Error(Errc::ServiceUnavailable,
                "cannot reach " + host + ":" + std::to_string(port) + ": " +
                    httplib::to_string(res.error()));
  }
  return {res->status, res->body, res->get_header_value(api::kSourceHeader)};
}

}  // namespace fdbs::server
