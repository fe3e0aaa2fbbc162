#pragma once

// Named sup-norm residuals with pass flags, plus the tolerance table they
// are judged against.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace einhyp {

inline constexpr int kReportSchemaVersion = 1;

class Tolerances {
 public:
  // Every check name used by the library, with its default tolerance.
  static Tolerances defaults();

  // Throws SchemaError for a name that is not in the table.
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  // Parses "name=value"; throws SchemaError.
  void set_from_string(const std::string& assignment);
  bool contains(const std::string& name) const { return table_.count(name) != 0; }
  const std::map<std::string, double>& table() const { return table_; }

 private:
  std::map<std::string, double> table_;
};

struct ResidualEntry {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string grid;
};

class ResidualReport {
 public:
  // pass = residual <= tolerance; NaN never passes.
  void add(const std::string& name, double residual, double tolerance, const std::string& grid = "");
  // Takes the larger residual for names already present. Notices and
  // flags are appended. Names are prefixed with `prefix` when given.
  void absorb(const ResidualReport& other, const std::string& prefix = "");
  void note(const std::string& message);
  void flag(const std::string& message);

  bool all_pass() const;
  const ResidualEntry* find(const std::string& name) const;
  std::vector<std::string> failing() const;

  const std::vector<ResidualEntry>& entries() const { return entries_; }
  const std::vector<std::string>& notices() const { return notices_; }
  // Classification-violation style flags. They do not change pass flags.
  const std::vector<std::string>& flags() const { return flags_; }

  std::string orientation = "as-supplied";
  nlohmann::json extra = nlohmann::json::object();

 private:
  std::vector<ResidualEntry> entries_;
  std::vector<std::string> notices_;
  std::vector<std::string> flags_;
};

nlohmann::json to_json(const ResidualReport& report);
// check,residual,tolerance,pass,grid
std::string to_csv(const ResidualReport& report);

}  // namespace einhyp
