#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semreid/eval/metrics.hpp"

namespace semreid::harness {

// Published result rows from the paper-results tables, stored verbatim as
// strings so loading is bit-exact; "-" marks values the source leaves blank.
struct RegistryRow {
  std::string table;  // "lima" or "duke"
  std::string row;    // "1".. row number within the table
  std::string name;   // method label
  std::vector<std::pair<std::string, std::string>> metrics;  // (metric, value string)

  std::optional<double> value(const std::string& metric) const;
  std::string raw(const std::string& metric) const;
};

class ResultsRegistry {
 public:
  static ResultsRegistry load(const std::string& path);

  const RegistryRow& row(const std::string& table, const std::string& row) const;
  const std::vector<RegistryRow>& rows() const { return rows_; }
  std::string serialize() const;  // identical to the loaded file content

 private:
  std::vector<RegistryRow> rows_;
  std::string raw_content_;
};

// Side-by-side computed-vs-published table. Desk-scale numbers are
// directional context only; nothing here asserts equality.
std::string compare_to_registry(const eval::EvalReport& report, const ResultsRegistry& registry,
                                const std::string& table, const std::string& row);

}  // namespace semreid::harness
