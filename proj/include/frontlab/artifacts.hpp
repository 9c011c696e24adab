#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace frontlab {

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

// %.17g formatting, round-trips doubles exactly.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

// CSV with a header row; every cell formatted with format_double.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace frontlab
