#include "gbrw/report.hpp"

namespace gbrw {

nlohmann::json CheckResult::to_json() const {
  nlohmann::json j;
  j["check"] = name;
  j["pass"] = pass;
  if (margin)
    j["margin"] = *margin;
  else
    j["margin"] = nullptr;
  j["witness"] = witness;
  if (value) j["value"] = *value;
  return j;
}

nlohmann::json Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks_) arr.push_back(c.to_json());
  nlohmann::json j;
  j["pass"] = pass();
  j["checks"] = arr;
  return j;
}

}  // namespace gbrw
