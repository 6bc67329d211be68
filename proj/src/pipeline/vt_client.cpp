#include "ember/pipeline/vt_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace ember::pipeline {
namespace {

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  }
  void sleep_ms(std::int64_t ms) override {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }
};

class HttplibTransport final : public Transport {
 public:
  HttplibTransport(const std::string& base_url, int timeout) : client_(base_url) {
    client_.set_follow_location(true);
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
  }

  HttpResponse send(const HttpRequest& request) override {
    httplib::Headers headers(request.headers.begin(), request.headers.end());
    std::lock_guard lock(mu_);
    const auto res = request.method == "POST"
                         ? client_.Post(request.path, headers, request.body, "application/x-www-form-urlencoded")
                         : client_.Get(request.path, headers);
    HttpResponse out;
    if (!res) {
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    for (const auto& [k, v] : res->headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      out.headers[key] = v;
    }
    return out;
  }

 private:
  httplib::Client client_;
  std::mutex mu_;
};

std::optional<std::int64_t> retry_after_ms(const HttpResponse& r) {
  const auto it = r.headers.find("retry-after");
  if (it == r.headers.end()) return std::nullopt;
  try {
    std::size_t used = 0;
    const long long s = std::stoll(it->second, &used);
    if (used != it->second.size() || s < 0) return std::nullopt;
    return s * 1000;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url, int timeout_seconds) {
  return std::make_unique<HttplibTransport>(base_url, timeout_seconds);
}

Clock& system_clock() {
  static SystemClock c;
  return c;
}

RateLimiter::RateLimiter(double requests_per_minute, Clock& clock)
    : interval_ms_(requests_per_minute > 0 ? static_cast<std::int64_t>(60000.0 / requests_per_minute) : 0), clock_(clock) {}

void RateLimiter::acquire() {
  std::int64_t wait = 0;
  {
    std::lock_guard lock(mu_);
    const auto now = clock_.now_ms();
    const auto slot = std::max(now, next_ms_);
    next_ms_ = slot + interval_ms_;
    wait = slot - now;
  }
  clock_.sleep_ms(wait);
}

std::int64_t RetryPolicy::delay_ms(int attempt) const {
  std::int64_t d = base_delay_ms;
  for (int i = 1; i < attempt && d < max_delay_ms; ++i) d *= 2;
  return std::min(d, max_delay_ms);
}

std::string_view failure_name(Failure f) {
  switch (f) {
    case Failure::none: return "ok";
    case Failure::not_found: return "not_found";
    case Failure::quota_exhausted: return "quota_exhausted";
    case Failure::transport: return "transport";
    case Failure::auth: return "auth";
    case Failure::http: return "http";
    case Failure::bad_response: return "bad_response";
  }
  return "http";
}

VtClient::VtClient(Transport& transport, std::string api_key, RateLimiter& limiter, RetryPolicy policy, Clock& clock)
    : transport_(transport), api_key_(std::move(api_key)), limiter_(limiter), policy_(policy), clock_(clock) {}

VtResult VtClient::call(HttpRequest request) {
  request.headers["x-apikey"] = api_key_;
  request.headers["accept"] = "application/json";
  VtResult out;
  for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
    limiter_.acquire();
    const auto res = transport_.send(request);
    out.attempts = attempt;
    out.status = res.status;
    out.body = res.body;
    std::optional<std::int64_t> wait;
    if (res.status == 0) {
      out.failure = Failure::transport;
      out.message = res.error;
    } else if (res.status >= 200 && res.status < 300) {
      out.failure = Failure::none;
      out.message.clear();
      return out;
    } else if (res.status == 404) {
      out.failure = Failure::not_found;
      out.message = "not found";
      return out;
    } else if (res.status == 401 || res.status == 403) {
      out.failure = Failure::auth;
      out.message = "credential rejected (HTTP " + std::to_string(res.status) + ")";
      return out;
    } else if (res.status == 429) {
      out.failure = Failure::quota_exhausted;
      out.message = "quota exhausted";
      wait = retry_after_ms(res);
    } else if (res.status >= 500) {
      out.failure = Failure::transport;
      out.message = "server error HTTP " + std::to_string(res.status);
      wait = retry_after_ms(res);
    } else {
      out.failure = Failure::http;
      out.message = "HTTP " + std::to_string(res.status);
      return out;
    }
    if (attempt < policy_.max_attempts) clock_.sleep_ms(wait.value_or(policy_.delay_ms(attempt)));
  }
  return out;
}

VtResult VtClient::get_report(std::string_view sha256) {
  auto r = call({"GET", "/api/v3/files/" + std::string(sha256), {}, {}});
  if (r.ok()) {
    const auto j = nlohmann::json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("data")) {
      r.failure = Failure::bad_response;
      r.message = "response is not a file report";
    }
  }
  return r;
}

VtResult VtClient::request_rescan(std::string_view sha256) {
  return call({"POST", "/api/v3/files/" + std::string(sha256) + "/analyse", {}, {}});
}

VtResult VtClient::download(std::string_view sha256) {
  return call({"GET", "/api/v3/files/" + std::string(sha256) + "/download", {}, {}});
}

namespace {

Failure record_failure(ReportStore& store, std::string_view sha256, const char* op, const VtResult& r, Clock& clock) {
  store.append_dead_letter({std::string(sha256), op, std::string(failure_name(r.failure)), r.message, clock.now_s(), r.attempts});
  return r.failure;
}

}  // namespace

Failure fetch_report(VtClient& client, ReportStore& store, std::string_view sha256, Clock& clock) {
  const auto r = client.get_report(sha256);
  if (!r.ok()) return record_failure(store, sha256, "fetch", r, clock);
  store.append_report(sha256, nlohmann::json::parse(r.body), clock.now_s());
  return Failure::none;
}

Failure request_rescan(VtClient& client, ReportStore& store, std::string_view sha256, Clock& clock) {
  const auto r = client.request_rescan(sha256);
  if (!r.ok()) return record_failure(store, sha256, "rescan", r, clock);
  store.append_rescan_request(sha256, clock.now_s());
  return Failure::none;
}

}  // namespace ember::pipeline
