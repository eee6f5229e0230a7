#pragma once

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kdpspdc/hom.hpp"
#include "kdpspdc/phasematch.hpp"
#include "kdpspdc/spectral.hpp"

namespace kdpspdc {

// Ordered `# key: value` header lines.
using Header = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string> header_value(const Header& header, std::string_view key);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

// Grid file:
//   # kdpspdc-grid: 1
//   # units: wavelength um, amplitude 1/um
//   # signal_nodes: N
//   # idler_nodes: M
//   # normalized: true|false
//   # manifest: <hash>
//   # <extra key>: <value>            (crystal, pump_nm, purity, ...)
//   # idler_um: i_1 ... i_M
//   s_1 re(1,1) im(1,1) ... re(1,M) im(1,M)
//   ...
struct GridDocument {
  SpectralGrid grid;
  Header header;  // every header line except the idler axis
};

std::string format_grid(const SpectralGrid& grid, std::string_view manifest_hash, const Header& extra = {});
GridDocument parse_grid(std::string_view text);

// Curve file: header (units, nodes, baseline, visibility, manifest), then one
// "tau_fs probability" row per delay.
struct CurveDocument {
  HomCurve curve;
  Header header;
};

std::string format_curve(const HomCurve& curve, std::string_view manifest_hash, const Header& extra = {});
CurveDocument parse_curve(std::string_view text);

// Field file: header (units, crystal, node counts, manifest, columns), then one
// "pump_um angle_deg delta_k gvm1 gvm2 gvm3" row per node, angle fastest.
std::string format_field(const PmfGvmMap& map, std::string_view manifest_hash, const Header& extra = {});
PmfGvmMap parse_field(std::string_view text);

/// Written next to every output as <output>.manifest.json.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::string database_version;
  std::string tool_version;
  std::string timestamp;  // ISO 8601 UTC; SOURCE_DATE_EPOCH wins over the clock

  /// Hash of command, params and both versions; argv and timestamp excluded
  /// so identical runs share it.
  std::string hash() const;
  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::ordered_json& j);
};

std::string utc_timestamp();
std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace kdpspdc
