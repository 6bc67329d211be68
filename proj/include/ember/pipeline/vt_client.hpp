#pragma once

// VirusTotal REST v3 client over a pluggable transport, with a shared
// request-spacing rate limiter and bounded exponential backoff.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ember/pipeline/report_store.hpp"

namespace ember::pipeline {

struct HttpRequest {
  std::string method;  // "GET" or "POST"
  std::string path;
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;  // 0 when the request never completed
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
  std::string error;  // transport error text when status == 0
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

// HTTPS transport backed by cpp-httplib; follows redirects.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url = "https://www.virustotal.com",
                                               int timeout_seconds = 60);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() = 0;
  virtual void sleep_ms(std::int64_t ms) = 0;
  std::int64_t now_s() { return now_ms() / 1000; }
};

Clock& system_clock();

class RateLimiter {
 public:
  RateLimiter(double requests_per_minute, Clock& clock);
  // Blocks until the caller may issue one request.
  void acquire();

 private:
  std::int64_t interval_ms_;
  std::int64_t next_ms_ = 0;
  Clock& clock_;
  std::mutex mu_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::int64_t base_delay_ms = 2000;
  std::int64_t max_delay_ms = 120000;

  std::int64_t delay_ms(int attempt) const;  // attempt counts from 1
};

enum class Failure { none, not_found, quota_exhausted, transport, auth, http, bad_response };

std::string_view failure_name(Failure f);

struct VtResult {
  Failure failure = Failure::none;
  int status = 0;
  int attempts = 0;
  std::string body;
  std::string message;

  bool ok() const { return failure == Failure::none; }
};

class VtClient {
 public:
  VtClient(Transport& transport, std::string api_key, RateLimiter& limiter, RetryPolicy policy, Clock& clock);

  VtResult get_report(std::string_view sha256);
  VtResult request_rescan(std::string_view sha256);
  VtResult download(std::string_view sha256);

 private:
  VtResult call(HttpRequest request);

  Transport& transport_;
  std::string api_key_;
  RateLimiter& limiter_;
  RetryPolicy policy_;
  Clock& clock_;
};

// Operations that persist their outcome: successes to the store, failures
// to the dead-letter log.
Failure fetch_report(VtClient& client, ReportStore& store, std::string_view sha256, Clock& clock);
Failure request_rescan(VtClient& client, ReportStore& store, std::string_view sha256, Clock& clock);

}  // namespace ember::pipeline
