#include "kdpspdc/formats.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "kdpspdc/crystal_db.hpp"
#include "kdpspdc/error.hpp"

namespace kdpspdc {

std::optional<std::string> header_value(const Header& header, std::string_view key) {
  for (const auto& [k, v] : header)
    if (k == key) return v;
  return std::nullopt;
}

std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, r.ptr};
}

double parse_double(std::string_view text) {
  double x = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), x);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw Error(Errc::parse, "not a number: '" + std::string(text) + "'");
  return x;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

struct Parsed {
  Header header;
  std::vector<std::vector<double>> rows;
};

// Splits `# key: value` lines from numeric rows. The first header line must
// be the magic key with version 1.
Parsed parse_document(std::string_view text, std::string_view magic) {
  Parsed p;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      line.remove_prefix(1);
      const auto colon = line.find(':');
      if (colon == std::string_view::npos)
        throw Error(Errc::parse, "line " + std::to_string(line_no) + ": header line without ':'");
      auto trim = [](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        return std::string(s);
      };
      p.header.emplace_back(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
      continue;
    }
    std::vector<double> row;
    for (auto field : split_ws(line)) {
      try {
        row.push_back(parse_double(field));
      } catch (const Error& e) {
        throw Error(Errc::parse, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    p.rows.push_back(std::move(row));
  }
  if (p.header.empty() || p.header.front().first != magic)
    throw Error(Errc::parse, "missing '# " + std::string(magic) + ": 1' first line");
  if (p.header.front().second != "1")
    throw Error(Errc::parse, "unsupported " + std::string(magic) + " version " + p.header.front().second);
  return p;
}

std::string require(const Header& h, std::string_view key) {
  auto v = header_value(h, key);
  if (!v) throw Error(Errc::parse, "missing header field '" + std::string(key) + "'");
  return *v;
}

std::size_t require_count(const Header& h, std::string_view key) {
  const std::string v = require(h, key);
  std::size_t n = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), n);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw Error(Errc::parse, "header field '" + std::string(key) + "' is not a count");
  return n;
}

void put(std::ostringstream& out, std::string_view key, std::string_view value) {
  out << "# " << key << ": " << value << '\n';
}

void put_extra(std::ostringstream& out, const Header& extra) {
  for (const auto& [k, v] : extra) put(out, k, v);
}

constexpr std::string_view grid_units = "wavelength um, amplitude 1/um";
constexpr std::string_view curve_units = "delay fs, probability 1";
constexpr std::string_view field_units = "pump um, angle deg, delta_k rad/um, gvm s/m";
constexpr std::string_view field_columns = "pump_um angle_deg delta_k gvm1 gvm2 gvm3";

void require_units(const Header& h, std::string_view expected) {
  const std::string units = require(h, "units");
  if (units != expected)
    throw Error(Errc::parse, "units are '" + units + "', expected '" + std::string(expected) + "'");
}

}  // namespace

std::string format_grid(const SpectralGrid& grid, std::string_view manifest_hash, const Header& extra) {
  grid.check_axes();
  std::ostringstream out;
  put(out, "kdpspdc-grid", "1");
  put(out, "units", grid_units);
  put(out, "signal_nodes", std::to_string(grid.signal_um.size()));
  put(out, "idler_nodes", std::to_string(grid.idler_um.size()));
  put(out, "normalized", grid.normalized ? "true" : "false");
  put(out, "manifest", manifest_hash);
  put_extra(out, extra);
  out << "# idler_um:";
  for (double x : grid.idler_um) out << ' ' << format_double(x);
  out << '\n';
  for (std::size_t s = 0; s < grid.signal_um.size(); ++s) {
    out << format_double(grid.signal_um[s]);
    for (std::size_t i = 0; i < grid.idler_um.size(); ++i) {
      const auto a = grid.amplitude(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
      out << ' ' << format_double(a.real()) << ' ' << format_double(a.imag());
    }
    out << '\n';
  }
  return out.str();
}

GridDocument parse_grid(std::string_view text) {
  Parsed p = parse_document(text, "kdpspdc-grid");
  require_units(p.header, grid_units);
  const std::size_t ns = require_count(p.header, "signal_nodes");
  const std::size_t ni = require_count(p.header, "idler_nodes");
  const std::string normalized = require(p.header, "normalized");
  if (normalized != "true" && normalized != "false") throw Error(Errc::parse, "normalized must be true or false");
  require(p.header, "manifest");

  GridDocument doc;
  const std::string idler_line = require(p.header, "idler_um");
  for (auto field : split_ws(idler_line)) doc.grid.idler_um.push_back(parse_double(field));
  if (doc.grid.idler_um.size() != ni)
    throw Error(Errc::parse, "idler_um lists " + std::to_string(doc.grid.idler_um.size()) + " values, header says " +
                                 std::to_string(ni));
  if (p.rows.size() != ns)
    throw Error(Errc::parse, "found " + std::to_string(p.rows.size()) + " signal rows, header says " +
                                 std::to_string(ns));
  doc.grid.amplitude.resize(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ni));
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& row = p.rows[s];
    if (row.size() != 1 + 2 * ni)
      throw Error(Errc::parse, "signal row " + std::to_string(s + 1) + " has " + std::to_string(row.size()) +
                                   " values, expected " + std::to_string(1 + 2 * ni));
    doc.grid.signal_um.push_back(row[0]);
    for (std::size_t i = 0; i < ni; ++i)
      doc.grid.amplitude(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = {row[1 + 2 * i], row[2 + 2 * i]};
  }
  doc.grid.normalized = normalized == "true";
  try {
    doc.grid.check_axes();
  } catch (const Error& e) {
    throw Error(Errc::parse, e.what());
  }
  for (auto& kv : p.header)
    if (kv.first != "idler_um") doc.header.push_back(std::move(kv));
  return doc;
}

std::string format_curve(const HomCurve& curve, std::string_view manifest_hash, const Header& extra) {
  if (curve.delays_s.size() != curve.probability.size())
    throw Error(Errc::validation, "curve delay and probability arrays differ in length");
  std::ostringstream out;
  put(out, "kdpspdc-curve", "1");
  put(out, "units", curve_units);
  put(out, "nodes", std::to_string(curve.delays_s.size()));
  put(out, "baseline", curve.baseline ? format_double(*curve.baseline) : "none");
  put(out, "visibility", curve.visibility ? format_double(*curve.visibility) : "none");
  put(out, "manifest", manifest_hash);
  put_extra(out, extra);
  for (std::size_t k = 0; k < curve.delays_s.size(); ++k)
    out << format_double(curve.delays_s[k] * 1e15) << ' ' << format_double(curve.probability[k]) << '\n';
  return out.str();
}

CurveDocument parse_curve(std::string_view text) {
  Parsed p = parse_document(text, "kdpspdc-curve");
  require_units(p.header, curve_units);
  const std::size_t n = require_count(p.header, "nodes");
  if (p.rows.size() != n)
    throw Error(Errc::parse, "found " + std::to_string(p.rows.size()) + " rows, header says " + std::to_string(n));
  CurveDocument doc;
  for (const auto& row : p.rows) {
    if (row.size() != 2) throw Error(Errc::parse, "curve rows need exactly two columns");
    doc.curve.delays_s.push_back(row[0] * 1e-15);
    doc.curve.probability.push_back(row[1]);
  }
  for (auto key : {"baseline", "visibility"}) {
    const std::string v = require(p.header, key);
    if (v == "none") continue;
    (std::string_view(key) == "baseline" ? doc.curve.baseline : doc.curve.visibility) = parse_double(v);
  }
  doc.header = std::move(p.header);
  return doc;
}

std::string format_field(const PmfGvmMap& map, std::string_view manifest_hash, const Header& extra) {
  std::ostringstream out;
  put(out, "kdpspdc-field", "1");
  put(out, "units", field_units);
  put(out, "crystal", name(map.crystal));
  put(out, "pump_nodes", std::to_string(map.pump_um.size()));
  put(out, "angle_nodes", std::to_string(map.angle_deg.size()));
  put(out, "manifest", manifest_hash);
  put_extra(out, extra);
  put(out, "columns", field_columns);
  for (std::size_t i = 0; i < map.pump_um.size(); ++i) {
    for (std::size_t j = 0; j < map.angle_deg.size(); ++j) {
      const std::size_t k = map.at(i, j);
      out << format_double(map.pump_um[i]) << ' ' << format_double(map.angle_deg[j]) << ' '
          << format_double(map.delta_k[k]) << ' ' << format_double(map.gvm1[k]) << ' '
          << format_double(map.gvm2[k]) << ' ' << format_double(map.gvm3[k]) << '\n';
    }
  }
  return out.str();
}

PmfGvmMap parse_field(std::string_view text) {
  Parsed p = parse_document(text, "kdpspdc-field");
  require_units(p.header, field_units);
  if (require(p.header, "columns") != field_columns) throw Error(Errc::parse, "unexpected field columns");
  const auto crystal = parse_crystal(require(p.header, "crystal"));
  if (!crystal) throw Error(Errc::parse, "unknown crystal in field header");
  const std::size_t np = require_count(p.header, "pump_nodes");
  const std::size_t na = require_count(p.header, "angle_nodes");
  if (p.rows.size() != np * na)
    throw Error(Errc::parse, "found " + std::to_string(p.rows.size()) + " rows, expected " + std::to_string(np * na));
  PmfGvmMap map;
  map.crystal = *crystal;
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const auto& row = p.rows[r];
    if (row.size() != 6) throw Error(Errc::parse, "field rows need six columns");
    if (r % na == 0) map.pump_um.push_back(row[0]);
    if (r < na) map.angle_deg.push_back(row[1]);
    if (row[0] != map.pump_um[r / na] || row[1] != map.angle_deg[r % na])
      throw Error(Errc::parse, "field rows are not a pump-major rectangular grid");
    map.delta_k.push_back(row[2]);
    map.gvm1.push_back(row[3]);
    map.gvm2.push_back(row[4]);
    map.gvm3.push_back(row[5]);
  }
  return map;
}

std::string RunManifest::hash() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["params"] = params;
  j["database_version"] = database_version;
  j["tool_version"] = tool_version;
  return content_hash(j.dump());
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  j["params"] = params;
  j["database_version"] = database_version;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["hash"] = hash();
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::ordered_json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.params = j.at("params");
    m.database_version = j.at("database_version").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.value("timestamp", std::string{});
    if (j.contains("hash") && j["hash"].get<std::string>() != m.hash())
      throw Error(Errc::validation, "manifest hash does not match its contents");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("manifest: ") + e.what());
  }
}

std::string utc_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace kdpspdc
