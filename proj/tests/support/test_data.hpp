#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace testdata {

/// Repository root, baked in at configure time.
std::filesystem::path source_dir();
std::filesystem::path data_path(const std::string& name);

/// Comma-separated rows, header included; no quoting support needed.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// tests/fixtures and the pieces inside it.
std::filesystem::path fixture_dir();
std::filesystem::path fixture_corpus();
std::filesystem::path fixture_cache();
std::filesystem::path templates_dir();

/// Every document of the fixture bundle, keyed by name without ".json".
std::map<std::string, std::string> fixture_documents();

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testdata
