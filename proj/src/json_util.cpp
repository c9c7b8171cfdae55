#include "json_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "blendforge/error.hpp"

namespace blendforge::detail {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot open {}", path.string()),
                       path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const int line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw LocatedError(ErrorCode::Schema,
                       fmt::format("{}:{}: invalid JSON: {}", path.string(), line,
                                   e.what()),
                       path.string(), line);
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw LocatedError(ErrorCode::Io, fmt::format("cannot write {}", path.string()),
                       path.string());
  }
  out << doc.dump(2) << '\n';
}

}  // namespace blendforge::detail
