#include <ctime>
#include <sstream>

#include "common/json_util.hpp"
#include "gradekit/grader/grader.hpp"

namespace gradekit::grader {

std::string utc_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : file_(std::move(dir) / kFileName) {
  std::error_code ec;
  if (!std::filesystem::exists(file_, ec)) return;
  std::ifstream in(file_, std::ios::binary);
  if (!in) throw Error("cannot read cache " + file_.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const std::string where = file_.filename().string() + " line " + std::to_string(number);
    detail::Json j;
    try {
      j = detail::Json::parse(line);
    } catch (const detail::Json::parse_error& e) {
      throw ParseError(file_.string() + ":" + std::to_string(number) + ": malformed cache record", number,
                       e.byte);
    }
    RawResponse r;
    r.prompt_hash = detail::string_field(j, "prompt_hash", where);
    r.model_id = detail::string_field(j, "model_id", where);
    r.temperature = detail::number_field(j, "temperature", where);
    r.text = detail::string_field(j, "completion", where);
    r.retrieved_at = detail::string_field(j, "timestamp", where);
    records_.emplace(r.prompt_hash, std::move(r));
  }
}

std::optional<RawResponse> ResponseCache::find(const std::string& prompt_hash) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(prompt_hash);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

bool ResponseCache::put(const RawResponse& r) {
  std::lock_guard lock(mutex_);
  if (records_.count(r.prompt_hash) != 0) return false;
  if (!out_.is_open()) {
    std::error_code ec;
    std::filesystem::create_directories(file_.parent_path(), ec);
    out_.open(file_, std::ios::binary | std::ios::app);
    if (!out_) throw Error("cannot append to cache " + file_.string());
  }
  detail::OrderedJson j;
  j["prompt_hash"] = r.prompt_hash;
  j["model_id"] = r.model_id;
  j["temperature"] = r.temperature;
  j["completion"] = r.text;
  j["timestamp"] = r.retrieved_at;
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw Error("write to cache " + file_.string() + " failed");
  records_.emplace(r.prompt_hash, r);
  return true;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

}  // namespace gradekit::grader
