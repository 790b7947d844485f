#include "triage/core/status.hpp"

#include <cctype>

#include "triage/error.hpp"

namespace triage {
namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "safe", "evacuation", "call_for_help", "emergency", "smoke", "flame"};

std::string normalize(std::string_view label) {
  std::string out;
  bool pending_sep = false;
  for (char ch : label) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_' || ch == '-') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out.push_back('_');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::string_view to_string(DamageStatus s) { return kCategoryNames[index_of(s)]; }
std::string_view to_string(SceneCategory c) { return kCategoryNames[index_of(c)]; }

SceneCategory category_from_label(std::string_view label) {
  const std::string norm = normalize(label);
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (norm == kCategoryNames[i]) return kAllCategories[i];
  }
  throw UnknownLabel("'" + std::string(label) + "'");
}

DamageStatus status_from_label(std::string_view label) {
  const auto status = to_status(category_from_label(label));
  if (!status) throw UnknownLabel("'" + std::string(label) + "' is not a person status");
  return *status;
}

}  // namespace triage
