#pragma once

// Command-line front end and its JSON-lines result cache.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bh::cli {

const char* version();

// 64-bit FNV-1a of the canonical (sorted-key, compact) JSON dump, as hex.
std::string job_hash(const nlohmann::json& canonical_job);

struct ResultRecord {
  std::string hash;
  std::string command;
  std::string version;
  std::string timestamp;
  nlohmann::json result;

  nlohmann::json to_json() const;
  static ResultRecord from_json(const nlohmann::json& j);
  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

// Append-only JSON-lines store. Lines that fail to parse are skipped and
// counted; the newest record for a hash wins.
class ResultStore {
 public:
  explicit ResultStore(std::string path) : path_(std::move(path)) {}

  std::optional<ResultRecord> lookup(const std::string& hash, const std::string& version = cli::version());
  void append(const ResultRecord& record) const;  // one write() per line
  int skipped_lines() const { return skipped_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int skipped_ = 0;
};

// Exit codes: 0 success (including a NormBounded outcome), 2 validation
// error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bh::cli
