#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace gbrw {

/// One verification check: name, outcome, a worst-case margin when the check
/// is quantitative, and a human-readable witness locating any failure.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::optional<double> margin;
  std::string witness;
  /// Certified quantity when the check produces one (x0, B, m0, ...).
  std::optional<double> value;

  nlohmann::json to_json() const;
};

/// Ordered list of check results; a report passes iff every entry does.
class Report {
 public:
  void add(CheckResult r) { checks_.push_back(std::move(r)); }
  void add(const std::string& name, bool pass, std::optional<double> margin = std::nullopt,
           std::string witness = "") {
    checks_.push_back({name, pass, margin, std::move(witness)});
  }

  bool pass() const {
    for (const auto& c : checks_)
      if (!c.pass) return false;
    return true;
  }

  const std::vector<CheckResult>& checks() const { return checks_; }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks_)
      if (c.name == name) return &c;
    return nullptr;
  }

  nlohmann::json to_json() const;

 private:
  std::vector<CheckResult> checks_;
};

}  // namespace gbrw
