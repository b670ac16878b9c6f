#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "rlab/hash.hpp"
#include "rlab/judge.hpp"
#include "rlab/jsonl.hpp"

namespace rlab {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

// Splits "http://host:port/path" into client base and request path.
void split_url(const std::string& url, std::string* base, std::string* path) {
  size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw Error("judge URL lacks a scheme: " + url);
  size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    *base = url;
    *path = "/v1/chat/completions";
  } else {
    *base = url.substr(0, slash);
    *path = url.substr(slash);
    if (*path == "/") *path = "/v1/chat/completions";
  }
}

// In-flight limiter. std::counting_semaphore wants a compile-time ceiling,
// so a tiny cv-based one is used instead.
class Gate {
 public:
  explicit Gate(int slots) : slots_(slots < 1 ? 1 : slots) {}
  void acquire() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return slots_ > 0; });
    --slots_;
  }
  void release() {
    {
      std::lock_guard lk(mu_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int slots_;
};

struct GatePass {
  Gate& gate;
  explicit GatePass(Gate& g) : gate(g) { gate.acquire(); }
  ~GatePass() { gate.release(); }
};

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpJudgeOptions http_options_from_env() {
  HttpJudgeOptions opts;
  opts.url = env_or("RLAB_JUDGE_URL", "");
  opts.token = env_or("RLAB_JUDGE_TOKEN", "");
  opts.model = env_or("RLAB_JUDGE_MODEL", "gpt-4o");
  return opts;
}

struct HttpJudge::Impl {
  HttpJudgeOptions opts;
  std::string base;
  std::string path;
  mutable Gate gate;

  explicit Impl(HttpJudgeOptions o) : opts(std::move(o)), gate(opts.max_inflight) {
    if (opts.url.empty()) {
      throw Error("judge URL not configured (set RLAB_JUDGE_URL or pass --judge mock)");
    }
    split_url(opts.url, &base, &path);
  }

  std::string cache_file(const std::string& prompt) const {
    uint64_t key = hash_fields({opts.model, prompt});
    return (std::filesystem::path(opts.cache_dir) / (to_hex(key) + ".json")).string();
  }

  std::optional<std::string> cache_lookup(const std::string& prompt) const {
    if (opts.cache_dir.empty()) return std::nullopt;
    std::string file = cache_file(prompt);
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    try {
      json j = json::parse(in);
      return j.at("content").get<std::string>();
    } catch (const json::exception&) {
      return std::nullopt;
    }
  }

  void cache_store(const std::string& prompt, const std::string& content) const {
    if (opts.cache_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(opts.cache_dir, ec);
    json j;
    j["content"] = content;
    write_file_atomic(cache_file(prompt), j.dump());
  }

  // One chat completion round trip with transient-failure retries.
  std::string complete(const std::string& prompt) const {
    if (auto cached = cache_lookup(prompt)) return *cached;

    json body;
    body["model"] = opts.model;
    body["temperature"] = 0;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
      if (attempt > 0) {
        int delay = opts.backoff_ms << (attempt - 1);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
      GatePass pass(gate);
      httplib::Client client(base);
      client.set_connection_timeout(std::chrono::duration<double>(opts.timeout_s));
      client.set_read_timeout(std::chrono::duration<double>(opts.timeout_s));
      httplib::Headers headers;
      if (!opts.token.empty()) headers.emplace("Authorization", "Bearer " + opts.token);
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = "connection failure: " + httplib::to_string(res.error());
        continue;
      }
      if (retryable_status(res->status)) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw Error("judge endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
      }
      try {
        json reply = json::parse(res->body);
        std::string content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        cache_store(prompt, content);
        return content;
      } catch (const json::exception& e) {
        throw Error(std::string("judge reply is not chat-completion shaped: ") + e.what() +
                    "; body:\n" + res->body);
      }
    }
    throw Error("judge endpoint unreachable after " + std::to_string(opts.max_attempts) +
                " attempts (" + last_error + ")");
  }
};

HttpJudge::HttpJudge(HttpJudgeOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

HttpJudge::~HttpJudge() = default;

JudgeVerdict HttpJudge::call(const JudgeRequest& req) const {
  std::string prompt = render_prompt(req);
  std::string content = impl_->complete(prompt);
  try {
    return parse_judge_reply(req.kind, content);
  } catch (const Error&) {
    // One reparse retry with a stricter instruction appended.
    std::string strict = prompt +
                         "\nYour previous reply did not follow the requested layout. Reply again, "
                         "following the layout exactly.";
    content = impl_->complete(strict);
    return parse_judge_reply(req.kind, content);
  }
}

}  // namespace rlab
