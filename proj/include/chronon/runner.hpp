#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chronon/config.hpp"

namespace chronon::cli {

using Cell = std::variant<std::int64_t, double>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

struct CommandResult {
  Table table;
  nlohmann::ordered_json summary;
};

/// Runs a single (non-sweep) command in memory.
CommandResult execute(const RunConfig& config);

/// Scientific notation, 17 significant digits, '\n' line ends.
std::string to_csv(const Table& table);
nlohmann::ordered_json to_json(const Table& table);

std::string format_double(double v);

struct RunReport {
  std::vector<std::filesystem::path> written;
};

/// Executes the config and writes its series and summary files. Sweep points
/// run concurrently; each writes `<stem>_<index><ext>`, and the combined
/// summary goes to `<stem>.summary.json`.
RunReport run(const RunConfig& config);

/// `<stem>.summary.json` next to the output path.
std::filesystem::path summary_path(const std::filesystem::path& output);

}  // namespace chronon::cli
