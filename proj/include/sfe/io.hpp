#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace sfe {

// FNV-1a over the canonical (sorted-key) JSON dump; embedded in every output
// for provenance.
std::string config_hash(const nlohmann::json& j);

nlohmann::json load_json_file(const std::filesystem::path& path);

// Write via temp file + rename so readers never observe a torn file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Minimal line chart (one polyline per series) for trend plots.
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string render_svg_lines(const std::string& title, bool log_x,
                             const std::vector<SvgSeries>& series);

}  // namespace sfe
