#pragma once

#include <map>
#include <string>
#include <vector>

#include "semreid/core/errors.hpp"

namespace semreid::harness {

// Key-value experiment config: `key = value` lines, '#' comments, and
// `include = other.cfg` preset inheritance (included values are defaults,
// the including file wins).
class Config {
 public:
  static Config load(const std::string& path);
  static Config from_string(const std::string& text, const std::string& base_dir = ".");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::int64_t integer64(const std::string& key, std::int64_t fallback) const;
  double real(const std::string& key, double fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }
  std::string echo() const;  // deterministic serialization of all keys

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace semreid::harness
