// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "net/http.hpp"

#include <thread>

#include <httplib.h>

#include "conke/error.hpp"

namespace conke::net {

Endpoint Endpoint::parse(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0)
    throw InputError("unsupported endpoint '" + url + "' (only http:// URLs are accepted)");
  std::string rest = url.substr(kScheme.size());
  Endpoint e;
  const std::size_t slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  if (slash != std::string::npos) e.base_path = rest.substr(slash);
  while (!e.base_path.empty() && e.base_path.back() == '/') e.base_path.pop_back();
  const std::size_t colon = authority.rfind(':');
  if (colon != std::string::npos) {
    try {
      e.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw InputError("bad port in endpoint '" + url + "'");
    }
    authority.resize(colon);
  }
  if (authority.empty()) throw InputError("missing host in endpoint '" + url + "'");
  if (e.port <= 0 || e.port > 65535) throw InputError("bad port in endpoint '" + url + "'");
  e.host = authority;
  return e;
}

std::string post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const RetryPolicy& retry, const Headers& headers) {
  httplib::Client client(endpoint.host, endpoint.port);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(retry.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(retry.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);

  const std::string target = endpoint.base_path + path;
  std::string last_error;
  auto backoff = retry.initial_backoff;
  const int attempts = std::max(1, retry.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(target, h, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP status " + std::to_string(res->status);
  }
  throw BackendError("POST " + endpoint.host + ":" + std::to_string(endpoint.port) + target +
                     " failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

}  // namespace conke::net
