#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "common/json_util.hpp"
#include "gradekit/grader/grader.hpp"

namespace gradekit::grader {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("endpoint must be an absolute URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool transient_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

}  // namespace

void BackendConfig::validate() const {
  if (!(temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
  if (model_id.empty()) throw PreconditionError("model id is empty");
  if (max_retries < 0) throw PreconditionError("max_retries must be >= 0");
  if (kind == BackendKind::HttpChat) {
    if (endpoint.empty()) throw PreconditionError("http backend needs an endpoint");
    split_endpoint(endpoint);
    if (credential_env.empty()) throw PreconditionError("http backend needs a credential environment variable");
  }
  if (cache_dir.empty()) throw PreconditionError("a cache directory is required");
}

Dispatcher::Dispatcher(BackendConfig config, ResponseCache& cache) : config_(std::move(config)), cache_(cache) {
  config_.validate();
}

RawResponse Dispatcher::dispatch(const prompting::PromptArtifact& artifact) {
  const std::string expected = prompting::content_hash(config_.key(), artifact.text);
  if (expected != artifact.content_hash) {
    throw PreconditionError("prompt was hashed for a different backend, model or temperature");
  }
  if (auto hit = cache_.find(artifact.content_hash)) return *hit;
  if (config_.kind == BackendKind::Replay) throw CacheMissError(artifact.content_hash);

  RawResponse r;
  r.prompt_hash = artifact.content_hash;
  r.text = request_completion(artifact.text);
  r.retrieved_at = utc_timestamp_now();
  r.model_id = config_.model_id;
  r.temperature = config_.temperature;
  cache_.put(r);
  // Another thread may have stored the same prompt first; serve the stored one.
  return cache_.find(r.prompt_hash).value_or(r);
}

std::string Dispatcher::request_completion(const std::string& prompt) {
  const char* secret = std::getenv(config_.credential_env.c_str());
  if (secret == nullptr || *secret == '\0') {
    throw PreconditionError("environment variable " + config_.credential_env + " holds no credential");
  }
  const Endpoint ep = split_endpoint(config_.endpoint);

  detail::OrderedJson body;
  body["model"] = config_.model_id;
  body["temperature"] = config_.temperature;
  body["messages"] = detail::OrderedJson::array({{{"role", "user"}, {"content", prompt}}});
  const std::string payload = body.dump();

  httplib::Client client(ep.origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());
  const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + secret}};

  auto backoff = config_.initial_backoff;
  std::string last_failure;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    ++requests_;
    const auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_failure = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (transient_status(res->status)) {
      last_failure = "HTTP status " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status > 299) {
      throw TransportError("chat endpoint answered HTTP " + std::to_string(res->status));
    }
    detail::Json reply;
    try {
      reply = detail::Json::parse(res->body);
    } catch (const detail::Json::parse_error&) {
      throw TransportError("chat endpoint returned a body that is not JSON");
    }
    const auto choices = reply.find("choices");
    if (choices == reply.end() || !choices->is_array() || choices->empty()) {
      throw TransportError("chat reply has no choices");
    }
    const detail::Json& first = (*choices)[0];
    std::string text;
    if (const auto m = first.find("message"); m != first.end() && m->is_object()) {
      if (const auto c = m->find("content"); c != m->end() && c->is_string()) text = c->get<std::string>();
    }
    if (text.empty()) throw TransportError("chat reply carries an empty completion");
    return text;
  }
  throw TransportError("gave up after " + std::to_string(config_.max_retries + 1) + " attempts: " + last_failure);
}

RawResponse dispatch(const prompting::PromptArtifact& artifact, const BackendConfig& config, ResponseCache& cache) {
  Dispatcher d(config, cache);
  return d.dispatch(artifact);
}

}  // namespace gradekit::grader
