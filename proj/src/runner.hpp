#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace gralis {

using ordered_json = nlohmann::ordered_json;

struct RunOutput {
  ordered_json report;
  // (file suffix, CSV text) pairs for curve data.
  std::vector<std::pair<std::string, std::string>> csv;
};

std::vector<std::string> subcommand_names();

// Runs one subcommand on a JSON config. The report embeds the config with all
// defaults filled in; the worker count goes to a separate "runtime" section.
RunOutput run_subcommand(std::string_view name, const nlohmann::json& config);

}  // namespace gralis
