#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace tokgraft {

// Deterministic JSON serialization: sorted keys, 2-space indent, floats
// rendered with exactly 6 decimal places. Reports are written with this so
// goldens diff cleanly.
std::string canonical_dump(const nlohmann::json& value);

std::string sha256_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace tokgraft
