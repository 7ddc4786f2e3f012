// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace conke::net {

// "http://host[:port][/base]". Throws InputError for anything else.
struct Endpoint {
  std::string host;
  int port = 80;
  std::string base_path;  // no trailing slash

  static Endpoint parse(const std::string& url);
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{30000};
};

using Headers = std::vector<std::pair<std::string, std::string>>;

// POSTs a JSON body to base_path + path and returns the response body.
// Transport failures and non-200 answers are retried with exponential
// backoff; after the last attempt a BackendError names the cause.
std::string post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const RetryPolicy& retry, const Headers& headers = {});

}  // namespace conke::net
