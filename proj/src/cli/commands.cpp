#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kdpspdc/crystal_db.hpp"
#include "kdpspdc/error.hpp"
#include "kdpspdc/formats.hpp"
#include "kdpspdc/hom.hpp"
#include "kdpspdc/phasematch.hpp"
#include "kdpspdc/spectral.hpp"
#include "kdpspdc/units.hpp"

#ifndef KDPSPDC_VERSION
#define KDPSPDC_VERSION "0.0.0"
#endif
#ifndef KDPSPDC_DEFAULT_DB
#define KDPSPDC_DEFAULT_DB "crystals.yaml"
#endif

namespace kdpspdc::cli {

namespace {

using json = nlohmann::ordered_json;

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string sci(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

// Left-aligned columns padded to the widest cell.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

CrystalId crystal_arg(const std::string& text) {
  auto id = parse_crystal(text);
  if (!id) throw Error(Errc::validation, "unknown crystal '" + text + "'");
  return *id;
}

GvmType gvm_arg(const std::string& text) {
  if (text == "1" || text == "gvm1" || text == "GVM1") return GvmType::gvm1;
  if (text == "2" || text == "gvm2" || text == "GVM2") return GvmType::gvm2;
  if (text == "3" || text == "gvm3" || text == "GVM3") return GvmType::gvm3;
  throw Error(Errc::validation, "unknown GVM type '" + text + "' (use 1, 2 or 3)");
}

struct Globals {
  std::string db_path;
  std::string format = "text";
};

struct Session {
  const Globals& globals;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> argv;
  std::optional<CrystalDatabase> db_storage;

  bool json_output() const { return globals.format == "json"; }

  std::string resolved_db_path() const {
    if (!globals.db_path.empty()) return globals.db_path;
    if (const char* env = std::getenv("KDPSPDC_DB"); env && *env) return env;
    return KDPSPDC_DEFAULT_DB;
  }

  const CrystalDatabase& db() {
    if (!db_storage) db_storage = CrystalDatabase::load(resolved_db_path());
    return *db_storage;
  }

  RunManifest manifest(std::string command, json params) {
    RunManifest m;
    m.command = std::move(command);
    m.argv = argv;
    m.params = std::move(params);
    m.database_version = db().version();
    m.tool_version = KDPSPDC_VERSION;
    m.timestamp = utc_timestamp();
    return m;
  }

  void write_output(const std::string& path, const std::string& text, const RunManifest& m) {
    write_text(path, text);
    write_text(manifest_path(path), m.to_json().dump(2) + "\n");
  }
};

json range_json(const CrystalRecord& r) {
  if (!r.has_dispersion()) return nullptr;
  return json::array({um_to_nm(r.min_um()), um_to_nm(r.max_um())});
}

std::vector<std::string> flag_list(const CrystalRecord& r) {
  std::vector<std::string> flags;
  for (CrystalFlag f : all_flags)
    if (r.has(f)) flags.emplace_back(flag_name(f));
  return flags;
}

int cmd_crystals(Session& s) {
  const auto& db = s.db();
  if (s.json_output()) {
    json arr = json::array();
    for (const auto& r : db.records()) {
      json j;
      j["name"] = name(r.id);
      j["flags"] = flag_list(r);
      j["range_nm"] = range_json(r);
      j["source"] = r.has_dispersion() ? json(r.ordinary->source) : json(nullptr);
      j["d_eff_pm_per_v"] = r.d_eff_pm_per_v;
      arr.push_back(j);
    }
    s.out << arr.dump(2) << '\n';
    return exit_ok;
  }
  std::vector<std::vector<std::string>> rows{{"crystal", "range_nm", "flags"}};
  for (const auto& r : db.records()) {
    std::string flags;
    for (const auto& f : flag_list(r)) flags += (flags.empty() ? "" : ",") + f;
    const std::string range =
        r.has_dispersion() ? fixed(um_to_nm(r.min_um()), 1) + "-" + fixed(um_to_nm(r.max_um()), 1) : "-";
    rows.push_back({std::string(name(r.id)), range, flags.empty() ? "-" : flags});
  }
  s.out << "# database " << db.version() << '\n';
  print_table(s.out, rows);
  return exit_ok;
}

struct GvmArgs {
  std::string crystal;
  bool all = false;
  std::string type;
  bool degenerate = false;
  std::optional<double> pump_nm;
};

struct GvmRow {
  CrystalId crystal;
  GvmType type;
  std::string status;  // "ok", "not satisfied", "no dispersion data"
  std::optional<GvmSolution> solution;
  std::optional<double> ridge;
};

json row_json(const GvmRow& r) {
  json j;
  j["crystal"] = name(r.crystal);
  j["type"] = to_string(r.type);
  j["status"] = r.status;
  if (r.solution) {
    const auto& c = r.solution->config;
    j["pump_nm"] = um_to_nm(c.pump_um);
    j["signal_nm"] = um_to_nm(c.signal_um);
    j["idler_nm"] = um_to_nm(c.idler_um);
    j["angle_deg"] = c.angle_deg;
    j["ridge_deg"] = r.ridge ? json(*r.ridge) : json(nullptr);
    j["residual_delta_k"] = r.solution->residual_delta_k;
    j["residual_gvm"] = r.solution->residual_gvm;
  }
  return j;
}

int cmd_gvm(Session& s, const GvmArgs& a) {
  if (a.all == !a.crystal.empty()) throw Error(Errc::validation, "give exactly one of --crystal or --all");
  if (a.degenerate && a.pump_nm) throw Error(Errc::validation, "--degenerate takes no --pump");
  if (!a.degenerate && !a.pump_nm) throw Error(Errc::validation, "nondegenerate search needs --pump (or use --degenerate)");
  if (!a.degenerate && !a.type.empty() && gvm_arg(a.type) != GvmType::gvm1)
    throw Error(Errc::validation, "nondegenerate search supports GVM1 only");

  const auto& db = s.db();
  std::vector<CrystalId> crystals;
  if (a.all)
    crystals.assign(all_crystals.begin(), all_crystals.end());
  else
    crystals.push_back(crystal_arg(a.crystal));
  std::vector<GvmType> types;
  if (!a.degenerate)
    types = {GvmType::gvm1};
  else if (!a.type.empty())
    types = {gvm_arg(a.type)};
  else
    types = {GvmType::gvm1, GvmType::gvm2, GvmType::gvm3};

  std::vector<GvmRow> rows;
  bool demanded_and_missing = false;
  for (CrystalId c : crystals) {
    for (GvmType t : types) {
      if (!db.at(c).has_dispersion()) {
        if (!a.all) db.dispersive(c);  // raises no_dispersion_data for a named crystal
        rows.push_back({c, t, "no dispersion data", std::nullopt, std::nullopt});
        continue;
      }
      std::vector<GvmSolution> found = a.degenerate
                                           ? solve_gvm_degenerate_all(db, c, t)
                                           : solve_gvm_nondegenerate_all(db, c, nm_to_um(*a.pump_nm));
      if (found.empty()) {
        rows.push_back({c, t, "not satisfied", std::nullopt, std::nullopt});
        if (!a.all && (!a.degenerate || !a.type.empty())) demanded_and_missing = true;
      }
      for (auto& sol : found) {
        const auto ridge = ridge_angle(db, sol.config);
        rows.push_back({c, t, "ok", std::move(sol), ridge});
      }
    }
  }

  if (s.json_output()) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    s.out << arr.dump(2) << '\n';
  } else {
    std::vector<std::vector<std::string>> table{
        {"crystal", "type", "pump_nm", "signal_nm", "idler_nm", "angle_deg", "ridge_deg", "dk_rad_per_um", "gvm_s_per_m"}};
    for (const auto& r : rows) {
      std::vector<std::string> line{std::string(name(r.crystal)), std::string(to_string(r.type))};
      if (!r.solution) {
        line.push_back(r.status);
      } else {
        const auto& c = r.solution->config;
        line.insert(line.end(), {fixed(um_to_nm(c.pump_um), 1), fixed(um_to_nm(c.signal_um), 1),
                                 fixed(um_to_nm(c.idler_um), 1), fixed(c.angle_deg, 2),
                                 r.ridge ? fixed(*r.ridge, 2) : "indeterminate", sci(r.solution->residual_delta_k),
                                 sci(r.solution->residual_gvm)});
      }
      table.push_back(std::move(line));
    }
    print_table(s.out, table);
  }
  return demanded_and_missing ? exit_no_solution : exit_ok;
}

struct JsaArgs {
  std::string crystal;
  std::optional<double> pump_nm;
  std::optional<double> signal_nm;
  std::optional<double> angle_deg;
  std::string gvm;
  bool nondegenerate = false;
  double bandwidth_nm = 0.0;
  double length_mm = 0.0;
  std::size_t nodes = 201;
  std::string output;
};

int cmd_jsa(Session& s, const JsaArgs& a) {
  const auto& db = s.db();
  const CrystalId crystal = crystal_arg(a.crystal);
  SpdcConfig config;
  if (!a.gvm.empty()) {
    if (a.angle_deg || a.signal_nm) throw Error(Errc::validation, "--gvm picks the angle and wavelengths itself");
    const GvmType type = gvm_arg(a.gvm);
    std::optional<GvmSolution> sol;
    if (a.nondegenerate) {
      if (type != GvmType::gvm1) throw Error(Errc::validation, "nondegenerate search supports GVM1 only");
      if (!a.pump_nm) throw Error(Errc::validation, "--nondegenerate needs --pump");
      sol = solve_gvm_nondegenerate(db, crystal, nm_to_um(*a.pump_nm));
    } else {
      sol = solve_gvm_degenerate(db, crystal, type, {},
                                 a.pump_nm ? std::optional<double>(nm_to_um(*a.pump_nm)) : std::nullopt);
    }
    if (!sol) throw Error(Errc::no_solution, std::string(name(crystal)) + " " + std::string(to_string(type)) + " not satisfied");
    config = sol->config;
    config.length_mm = a.length_mm;
  } else {
    if (a.nondegenerate) throw Error(Errc::validation, "--nondegenerate requires --gvm 1");
    if (!a.pump_nm) throw Error(Errc::validation, "--pump is required without --gvm");
    const double pump = nm_to_um(*a.pump_nm);
    if (a.signal_nm) {
      config = SpdcConfig::from_pump_signal(crystal, pump, nm_to_um(*a.signal_nm), 45.0, a.length_mm);
    } else {
      config = SpdcConfig::degenerate(crystal, pump, 45.0, a.length_mm);
    }
    config.angle_deg = a.angle_deg ? *a.angle_deg
                                   : solve_angle(db, crystal, config.pump_um, config.signal_um, config.idler_um);
  }
  config.validate();
  const PumpSpec pump{config.pump_um, nm_to_um(a.bandwidth_nm)};
  pump.validate();

  GridSpec spec = auto_grid(db, config, pump, a.nodes);
  for (const auto& w : spec.warnings) s.err << "warning: " << w << '\n';
  const SpectralGrid grid = jsa(db, config, pump, spec);
  const SchmidtResult sr = schmidt(grid);

  json params;
  params["crystal"] = name(crystal);
  params["pump_nm"] = um_to_nm(config.pump_um);
  params["signal_nm"] = um_to_nm(config.signal_um);
  params["idler_nm"] = um_to_nm(config.idler_um);
  params["angle_deg"] = config.angle_deg;
  params["length_mm"] = config.length_mm;
  params["bandwidth_nm"] = a.bandwidth_nm;
  params["nodes"] = a.nodes;
  params["signal_half_span_nm"] = um_to_nm(spec.signal_half_span_um);
  params["idler_half_span_nm"] = um_to_nm(spec.idler_half_span_um);

  if (!a.output.empty()) {
    const RunManifest m = s.manifest("jsa", params);
    const Header extra{{"crystal", std::string(name(crystal))},
                       {"pump_nm", format_double(um_to_nm(config.pump_um))},
                       {"signal_nm", format_double(um_to_nm(config.signal_um))},
                       {"idler_nm", format_double(um_to_nm(config.idler_um))},
                       {"angle_deg", format_double(config.angle_deg)},
                       {"length_mm", format_double(config.length_mm)},
                       {"bandwidth_nm", format_double(a.bandwidth_nm)},
                       {"purity", format_double(sr.purity)},
                       {"schmidt_number", format_double(sr.schmidt_number)}};
    s.write_output(a.output, format_grid(grid, m.hash(), extra), m);
  }

  if (s.json_output()) {
    json j = params;
    j["purity"] = sr.purity;
    j["schmidt_number"] = sr.schmidt_number;
    j["warnings"] = spec.warnings;
    s.out << j.dump(2) << '\n';
  } else {
    s.out << name(crystal) << "  pump " << fixed(um_to_nm(config.pump_um), 2) << " nm  signal "
          << fixed(um_to_nm(config.signal_um), 2) << " nm  idler " << fixed(um_to_nm(config.idler_um), 2)
          << " nm  angle " << fixed(config.angle_deg, 3) << " deg  L " << config.length_mm << " mm  bandwidth "
          << a.bandwidth_nm << " nm\n";
    s.out << "purity " << fixed(sr.purity, 6) << "\n";
    s.out << "schmidt_number " << fixed(sr.schmidt_number, 6) << "\n";
  }
  return exit_ok;
}

int cmd_purity(Session& s, const std::string& path) {
  const GridDocument doc = parse_grid(read_text(path));
  const SchmidtResult sr = schmidt(doc.grid);
  double sum = 0.0;
  for (double c : sr.coefficients) sum += c;
  const std::size_t shown = std::min<std::size_t>(10, sr.coefficients.size());
  if (s.json_output()) {
    json j;
    j["purity"] = sr.purity;
    j["schmidt_number"] = sr.schmidt_number;
    j["coefficients"] = std::vector<double>(sr.coefficients.begin(), sr.coefficients.begin() + static_cast<long>(shown));
    j["coefficient_sum"] = sum;
    s.out << j.dump(2) << '\n';
    return exit_ok;
  }
  s.out << "purity " << fixed(sr.purity, 6) << "\n";
  s.out << "schmidt_number " << fixed(sr.schmidt_number, 6) << "\n";
  s.out << "coefficient_sum " << fixed(sum, 12) << "\n";
  for (std::size_t k = 0; k < shown; ++k) s.out << "lambda_" << k + 1 << ' ' << sci(sr.coefficients[k]) << '\n';
  return exit_ok;
}

struct HomArgs {
  std::string first;
  std::string second;
  std::size_t delays = 201;
  std::optional<double> span_fs;
  std::string output;
};

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (std::abs(a[k] - b[k]) > 1e-12 * std::abs(a[k])) return false;
  return true;
}

int cmd_hom(Session& s, const HomArgs& a) {
  const std::string second_path = a.second.empty() ? a.first : a.second;
  const GridDocument d1 = parse_grid(read_text(a.first));
  GridDocument d2 = parse_grid(read_text(second_path));
  if (!same_axis(d1.grid.signal_um, d2.grid.signal_um)) {
    s.err << "warning: resampling the second grid onto the first grid's signal axis\n";
    d2.grid = resample_signal(d2.grid, d1.grid.signal_um);
  }
  const std::vector<double> delays =
      a.span_fs ? uniform_axis(0.0, *a.span_fs * 1e-15, a.delays) : default_delays(d1.grid, a.delays);
  const HomCurve curve = hom_fourfold(d1.grid, d2.grid, delays);
  const double v = visibility(curve);  // raises delay_range_too_narrow

  json params;
  params["first"] = a.first;
  params["second"] = second_path;
  params["first_manifest"] = header_value(d1.header, "manifest").value_or("");
  params["second_manifest"] = header_value(d2.header, "manifest").value_or("");
  params["delays"] = a.delays;
  params["half_span_fs"] = delays.back() * 1e15;

  if (!a.output.empty()) {
    const RunManifest m = s.manifest("hom", params);
    s.write_output(a.output, format_curve(curve, m.hash()), m);
  }
  if (s.json_output()) {
    json j = params;
    j["baseline"] = *curve.baseline;
    j["visibility"] = v;
    j["min_probability"] = *std::min_element(curve.probability.begin(), curve.probability.end());
    s.out << j.dump(2) << '\n';
  } else {
    s.out << "baseline " << fixed(*curve.baseline, 6) << "\n";
    s.out << "visibility " << fixed(v, 6) << "\n";
  }
  return exit_ok;
}

struct MapArgs {
  std::string crystal = "ADP";
  double pump_min_nm = 380.0;
  double pump_max_nm = 700.0;
  std::size_t pump_nodes = 321;
  double angle_min_deg = 40.0;
  double angle_max_deg = 90.0;
  std::size_t angle_nodes = 251;
  std::string output;
};

int cmd_map(Session& s, const MapArgs& a) {
  const auto& db = s.db();
  const CrystalId crystal = crystal_arg(a.crystal);
  const PmfGvmMap map = pmf_gvm_map(db, crystal, nm_to_um(a.pump_min_nm), nm_to_um(a.pump_max_nm), a.pump_nodes,
                                    a.angle_min_deg, a.angle_max_deg, a.angle_nodes);
  json params;
  params["crystal"] = name(crystal);
  params["pump_min_nm"] = a.pump_min_nm;
  params["pump_max_nm"] = a.pump_max_nm;
  params["pump_nodes"] = a.pump_nodes;
  params["angle_min_deg"] = a.angle_min_deg;
  params["angle_max_deg"] = a.angle_max_deg;
  params["angle_nodes"] = a.angle_nodes;
  json crossings = json::object();
  for (GvmType t : {GvmType::gvm1, GvmType::gvm2, GvmType::gvm3}) {
    json pts = json::array();
    for (const auto& [p, ang] : map_crossings(map, t)) pts.push_back({{"pump_nm", um_to_nm(p)}, {"angle_deg", ang}});
    crossings[std::string(to_string(t))] = pts;
  }
  if (!a.output.empty()) {
    RunManifest m = s.manifest("map", params);
    m.params["crossings"] = crossings;
    s.write_output(a.output, format_field(map, m.hash()), m);
  }
  if (s.json_output()) {
    json j = params;
    j["crossings"] = crossings;
    s.out << j.dump(2) << '\n';
  } else {
    for (const auto& [type, pts] : crossings.items()) {
      if (pts.empty()) s.out << type << " none\n";
      for (const auto& pt : pts)
        s.out << type << " pump_nm " << fixed(pt["pump_nm"].get<double>(), 1) << " angle_deg "
              << fixed(pt["angle_deg"].get<double>(), 2) << '\n';
    }
  }
  return exit_ok;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::no_solution:
    case Errc::no_phase_matching:
      return exit_no_solution;
    default:
      return exit_input;
  }
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err, int depth);

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err, int depth) {
  if (depth > 0) throw Error(Errc::validation, "a replayed manifest cannot itself be a replay");
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }
  const RunManifest m = RunManifest::from_json(j);
  std::vector<const char*> args{"kdpspdc"};
  for (const auto& a : m.argv) args.push_back(a.c_str());
  return dispatch(static_cast<int>(args.size()), args.data(), out, err, depth + 1);
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Design engine for spectrally pure photon pairs in KDP-isomorph crystals", "kdpspdc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", KDPSPDC_VERSION);
  Globals globals;
  app.add_option("--db", globals.db_path, "crystal database (default: $KDPSPDC_DB, then the shipped file)");
  app.add_option("--format", globals.format, "output format")->check(CLI::IsMember({"text", "json"}));

  auto* crystals = app.add_subcommand("crystals", "list crystals, flags and dispersion ranges");

  GvmArgs gvm;
  auto* gvm_cmd = app.add_subcommand("gvm", "solve simultaneous phase- and group-velocity matching");
  gvm_cmd->add_option("--crystal", gvm.crystal, "crystal name");
  gvm_cmd->add_flag("--all", gvm.all, "every crystal in the database");
  gvm_cmd->add_option("--type", gvm.type, "GVM condition 1, 2 or 3 (default: all three)");
  gvm_cmd->add_flag("--degenerate", gvm.degenerate, "signal and idler at twice the pump wavelength");
  gvm_cmd->add_option("--pump", gvm.pump_nm, "pump wavelength in nm (nondegenerate GVM1 search)");

  JsaArgs ja;
  auto* jsa_cmd = app.add_subcommand("jsa", "compute a joint spectral amplitude and its purity");
  jsa_cmd->add_option("--crystal", ja.crystal, "crystal name")->required();
  jsa_cmd->add_option("--pump", ja.pump_nm, "pump wavelength in nm");
  jsa_cmd->add_option("--signal", ja.signal_nm, "signal wavelength in nm (default: degenerate)");
  jsa_cmd->add_option("--angle", ja.angle_deg, "cut angle in degrees (default: phase-matching angle)");
  jsa_cmd->add_option("--gvm", ja.gvm, "take wavelengths and angle from this GVM solution");
  jsa_cmd->add_flag("--nondegenerate", ja.nondegenerate, "with --gvm 1: nondegenerate solution at --pump");
  jsa_cmd->add_option("--bandwidth", ja.bandwidth_nm, "pump bandwidth in nm")->required();
  jsa_cmd->add_option("--length", ja.length_mm, "crystal length in mm")->required();
  jsa_cmd->add_option("--nodes", ja.nodes, "grid nodes per axis")->check(CLI::Range(3, 2001));
  jsa_cmd->add_option("-o,--output", ja.output, "grid file to write");

  std::string purity_path;
  auto* purity_cmd = app.add_subcommand("purity", "Schmidt decomposition of a grid file");
  purity_cmd->add_option("grid", purity_path, "grid file")->required();

  HomArgs ha;
  auto* hom_cmd = app.add_subcommand("hom", "four-fold HOM interference of two heralded sources");
  hom_cmd->add_option("first", ha.first, "grid file of source 1")->required();
  hom_cmd->add_option("second", ha.second, "grid file of source 2 (default: same as source 1)");
  hom_cmd->add_option("--delays", ha.delays, "number of delay points")->check(CLI::Range(3, 100001));
  hom_cmd->add_option("--span", ha.span_fs, "delay half span in fs (default: 3/sigma of the signal marginal)");
  hom_cmd->add_option("-o,--output", ha.output, "curve file to write");

  MapArgs ma;
  auto* map_cmd = app.add_subcommand("map", "sample phase mismatch and GVM residuals over pump and angle");
  map_cmd->add_option("--crystal", ma.crystal, "crystal name");
  map_cmd->add_option("--pump-min", ma.pump_min_nm, "nm");
  map_cmd->add_option("--pump-max", ma.pump_max_nm, "nm");
  map_cmd->add_option("--pump-nodes", ma.pump_nodes)->check(CLI::Range(2, 100000));
  map_cmd->add_option("--angle-min", ma.angle_min_deg, "deg");
  map_cmd->add_option("--angle-max", ma.angle_max_deg, "deg");
  map_cmd->add_option("--angle-nodes", ma.angle_nodes)->check(CLI::Range(2, 100000));
  map_cmd->add_option("-o,--output", ma.output, "field file to write");

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", replay_path, "manifest JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input;
  }

  Session session{globals, out, err, {}, std::nullopt};
  for (int k = 1; k < argc; ++k) session.argv.emplace_back(argv[k]);
  if (*crystals) return cmd_crystals(session);
  if (*gvm_cmd) return cmd_gvm(session, gvm);
  if (*jsa_cmd) return cmd_jsa(session, ja);
  if (*purity_cmd) return cmd_purity(session, purity_path);
  if (*hom_cmd) return cmd_hom(session, ha);
  if (*map_cmd) return cmd_map(session, ma);
  if (*replay_cmd) return cmd_replay(replay_path, out, err, depth);
  return exit_input;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err, 0);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_input;
  }
}

}  // namespace kdpspdc::cli
