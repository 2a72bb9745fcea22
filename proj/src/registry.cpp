#include "semreid/harness/registry.hpp"

#include <fstream>
#include <sstream>

#include "semreid/core/errors.hpp"

namespace semreid::harness {

std::optional<double> RegistryRow::value(const std::string& metric) const {
  const std::string r = raw(metric);
  if (r == "-") return std::nullopt;
  return std::stod(r);
}

std::string RegistryRow::raw(const std::string& metric) const {
  for (const auto& [m, v] : metrics)
    if (m == metric) return v;
  throw RegistryError("registry row " + table + "/" + row + " has no metric '" + metric + "'");
}

ResultsRegistry ResultsRegistry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegistryError("cannot open registry: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ResultsRegistry reg;
  reg.raw_content_ = buffer.str();
  std::istringstream lines(reg.raw_content_);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string table, row, name, metric, value;
    if (!std::getline(ss, table, '\t') || !std::getline(ss, row, '\t') ||
        !std::getline(ss, name, '\t') || !std::getline(ss, metric, '\t') ||
        !std::getline(ss, value, '\t'))
      throw RegistryError("malformed registry line: " + line);
    RegistryRow* target = nullptr;
    for (RegistryRow& r : reg.rows_)
      if (r.table == table && r.row == row) target = &r;
    if (target == nullptr) {
      reg.rows_.push_back({table, row, name, {}});
      target = &reg.rows_.back();
    }
    if (target->name != name)
      throw RegistryError("registry row " + table + "/" + row + " renamed mid-file");
    target->metrics.push_back({metric, value});
  }
  if (reg.rows_.empty()) throw RegistryError("registry is empty: " + path);
  return reg;
}

const RegistryRow& ResultsRegistry::row(const std::string& table, const std::string& row) const {
  for (const RegistryRow& r : rows_)
    if (r.table == table && r.row == row) return r;
  throw RegistryError("no registry row " + table + "/" + row);
}

std::string ResultsRegistry::serialize() const { return raw_content_; }

std::string compare_to_registry(const eval::EvalReport& report, const ResultsRegistry& registry,
                                const std::string& table, const std::string& row) {
  const RegistryRow& r = registry.row(table, row);
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  os << "comparison vs " << r.table << " row " << r.row << " (" << r.name << ")\n";
  os << "metric\tcomputed\tpublished\tdelta\n";
  const auto emit = [&](const std::string& metric, double computed_frac) {
    for (const auto& [m, v] : r.metrics) {
      if (m != metric) continue;
      const double computed = 100.0 * computed_frac;
      os << metric << "\t" << computed << "\t" << v;
      if (v == "-")
        os << "\t-";
      else
        os << "\t" << computed - std::stod(v);
      os << "\n";
    }
  };
  double prec1 = 0.0, prec5 = 0.0;
  for (const auto& [k, p] : report.prec_at) {
    if (k == 1) prec1 = p;
    if (k == 5) prec5 = p;
  }
  if (table == "lima") {
    emit("all_prec1", prec1);
    emit("all_map", report.map_all);
    emit("pid_map", report.map_pid);
  } else {
    emit("prec1", prec1);
    emit("prec5", prec5);
    emit("map", report.map_all);
    if (!report.cmc.empty()) {
      emit("cmc1_sq", report.cmc[0]);
      emit("map_sq", report.retrieval_map);
    }
  }
  os << "note: desk-scale run, directional context only\n";
  return os.str();
}

}  // namespace semreid::harness
