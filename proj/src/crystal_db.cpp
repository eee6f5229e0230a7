#include "kdpspdc/crystal_db.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "kdpspdc/error.hpp"
#include "kdpspdc/units.hpp"

namespace kdpspdc {

namespace {

constexpr std::array<std::string_view, 14> crystal_names = {
    "KDP", "DKDP", "ADP", "DADP", "ADA", "DADA", "RDA", "DRDA", "RDP", "DRDP", "KDA", "DKDA", "CDA", "DCDA"};

}  // namespace

std::string_view name(CrystalId id) { return crystal_names[static_cast<std::size_t>(id)]; }

std::optional<CrystalId> parse_crystal(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (std::size_t i = 0; i < crystal_names.size(); ++i)
    if (crystal_names[i] == upper) return static_cast<CrystalId>(i);
  return std::nullopt;
}

bool is_deuterated(CrystalId id) { return name(id).front() == 'D'; }

std::string_view flag_name(CrystalFlag flag) {
  switch (flag) {
    case CrystalFlag::no_dispersion_data: return "no_dispersion_data";
    case CrystalFlag::no_gvm_solution: return "no_gvm_solution";
    case CrystalFlag::coefficients_pending: return "coefficients_pending";
  }
  return "?";
}

std::optional<CrystalFlag> parse_flag(std::string_view text) {
  for (CrystalFlag f : all_flags)
    if (flag_name(f) == text) return f;
  return std::nullopt;
}

double CrystalRecord::min_um() const {
  return std::max(ordinary ? ordinary->min_um : 0.0, extraordinary ? extraordinary->min_um : 0.0);
}

double CrystalRecord::max_um() const {
  return std::min(ordinary ? ordinary->max_um : 0.0, extraordinary ? extraordinary->max_um : 0.0);
}

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

void validate_record(const CrystalRecord& r) {
  const std::string crystal(name(r.id));
  const bool dataless = r.has(CrystalFlag::no_dispersion_data) || r.has(CrystalFlag::coefficients_pending);
  if (dataless) {
    if (r.ordinary || r.extraordinary)
      throw Error(Errc::validation, crystal + ": declares no dispersion data but carries Sellmeier entries");
    return;
  }
  if (!r.ordinary) throw Error(Errc::validation, crystal + ".ordinary: missing Sellmeier entry");
  if (!r.extraordinary) throw Error(Errc::validation, crystal + ".extraordinary: missing Sellmeier entry");
  validate(*r.ordinary, crystal + ".ordinary");
  validate(*r.extraordinary, crystal + ".extraordinary");
  const double lo = r.min_um();
  const double hi = r.max_um();
  if (!(lo < hi)) throw Error(Errc::validation, crystal + ": ordinary and extraordinary ranges do not overlap");
  constexpr int samples = 512;
  for (int i = 0; i <= samples; ++i) {
    const double l = lo + (hi - lo) * i / samples;
    if (!(r.ordinary->index(l) > r.extraordinary->index(l)))
      throw Error(Errc::validation, crystal + ": not negative uniaxial (n_o ≤ n_e) at " + std::to_string(l) + " µm");
  }
}

SellmeierEntry parse_entry(const YAML::Node& node, const std::string& context) {
  if (!node.IsMap()) throw Error(Errc::parse, context + ": expected a table");
  SellmeierEntry e;
  const auto form_text = node["form"].as<std::string>();
  const auto form = parse_form_id(form_text);
  if (!form) throw Error(Errc::validation, context + ".form: unknown form_id '" + form_text + "'");
  e.form = *form;
  e.coefficients = node["coefficients"].as<std::vector<double>>();
  const auto range = node["range"].as<std::vector<double>>();
  if (range.size() != 2) throw Error(Errc::parse, context + ".range: expected [min, max]");
  e.min_um = range[0];
  e.max_um = range[1];
  if (node["source"]) e.source = node["source"].as<std::string>();
  return e;
}

void emit_entry(YAML::Emitter& out, const SellmeierEntry& e) {
  out << YAML::BeginMap;
  out << YAML::Key << "form" << YAML::Value << std::string(form_id(e.form));
  out << YAML::Key << "coefficients" << YAML::Value << YAML::Flow << e.coefficients;
  out << YAML::Key << "range" << YAML::Value << YAML::Flow << std::vector<double>{e.min_um, e.max_um};
  out << YAML::Key << "source" << YAML::Value << YAML::DoubleQuoted << e.source;
  out << YAML::EndMap;
}

}  // namespace

CrystalDatabase::CrystalDatabase(std::vector<CrystalRecord> records, std::string version)
    : records_(std::move(records)), version_(std::move(version)) {
  std::set<CrystalId> seen;
  for (const auto& r : records_) {
    if (!seen.insert(r.id).second)
      throw Error(Errc::validation, std::string(name(r.id)) + ": duplicate crystal entry");
    validate_record(r);
  }
  if (version_.empty()) version_ = "unversioned+" + content_hash(serialize());
}

CrystalDatabase CrystalDatabase::parse(std::string_view text, std::string_view origin) {
  std::vector<CrystalRecord> records;
  std::string label = "unversioned";
  try {
    const YAML::Node root = YAML::Load(std::string(text));
    if (!root.IsMap() || !root["crystals"] || !root["crystals"].IsSequence())
      throw Error(Errc::parse, std::string(origin) + ": expected a top-level 'crystals' list");
    if (root["version"]) label = root["version"].as<std::string>();
    for (const auto& node : root["crystals"]) {
      if (!node["name"]) throw Error(Errc::parse, std::string(origin) + ": crystal entry without 'name'");
      const auto crystal_text = node["name"].as<std::string>();
      const auto id = parse_crystal(crystal_text);
      if (!id) throw Error(Errc::validation, crystal_text + ": unknown crystal name");
      CrystalRecord r;
      r.id = *id;
      if (node["flags"]) {
        for (const auto& f : node["flags"]) {
          const auto flag = parse_flag(f.as<std::string>());
          if (!flag) throw Error(Errc::validation, crystal_text + ".flags: unknown flag '" + f.as<std::string>() + "'");
          r.flags |= static_cast<unsigned>(*flag);
        }
      }
      if (node["ordinary"]) r.ordinary = parse_entry(node["ordinary"], crystal_text + ".ordinary");
      if (node["extraordinary"]) r.extraordinary = parse_entry(node["extraordinary"], crystal_text + ".extraordinary");
      if (node["d_eff"]) {
        for (const auto& kv : node["d_eff"]) r.d_eff_pm_per_v[kv.first.as<std::string>()] = kv.second.as<double>();
      }
      records.push_back(std::move(r));
    }
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse, std::string(origin) + ": " + e.what());
  }
  return CrystalDatabase(std::move(records), label + "+" + content_hash(text));
}

CrystalDatabase CrystalDatabase::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read crystal database '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::string CrystalDatabase::serialize() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema" << YAML::Value << 1;
  const auto plus = version_.find('+');
  out << YAML::Key << "version" << YAML::Value << YAML::DoubleQuoted
      << (plus == std::string::npos ? std::string("unversioned") : version_.substr(0, plus));
  out << YAML::Key << "crystals" << YAML::Value << YAML::BeginSeq;
  for (const auto& r : records_) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << std::string(name(r.id));
    std::vector<std::string> flags;
    for (CrystalFlag f : all_flags)
      if (r.has(f)) flags.emplace_back(flag_name(f));
    out << YAML::Key << "flags" << YAML::Value << YAML::Flow << flags;
    if (r.ordinary) {
      out << YAML::Key << "ordinary" << YAML::Value;
      emit_entry(out, *r.ordinary);
    }
    if (r.extraordinary) {
      out << YAML::Key << "extraordinary" << YAML::Value;
      emit_entry(out, *r.extraordinary);
    }
    if (!r.d_eff_pm_per_v.empty()) {
      out << YAML::Key << "d_eff" << YAML::Value << YAML::BeginMap;
      for (const auto& [k, v] : r.d_eff_pm_per_v) out << YAML::Key << k << YAML::Value << v;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

bool CrystalDatabase::contains(CrystalId id) const {
  return std::any_of(records_.begin(), records_.end(), [&](const auto& r) { return r.id == id; });
}

const CrystalRecord& CrystalDatabase::at(CrystalId id) const {
  for (const auto& r : records_)
    if (r.id == id) return r;
  throw Error(Errc::no_dispersion_data, std::string(name(id)) + " is not in the database");
}

const CrystalRecord& CrystalDatabase::dispersive(CrystalId id) const {
  const auto& r = at(id);
  if (r.has_dispersion()) return r;
  if (r.has(CrystalFlag::coefficients_pending))
    throw Error(Errc::no_dispersion_data, std::string(name(id)) + ": Sellmeier coefficients not yet transcribed into this database");
  throw Error(Errc::no_dispersion_data, std::string(name(id)) + ": no Sellmeier equation available");
}

void CrystalDatabase::check_wavelength(const CrystalRecord& r, double lambda_um) const {
  if (!(lambda_um >= r.min_um() && lambda_um <= r.max_um())) {
    std::ostringstream msg;
    msg << name(r.id) << ": wavelength " << lambda_um << " µm outside dispersion range [" << r.min_um() << ", "
        << r.max_um() << "] µm";
    throw Error(Errc::out_of_range, msg.str());
  }
}

double CrystalDatabase::index_o(CrystalId id, double lambda_um) const {
  const auto& r = dispersive(id);
  check_wavelength(r, lambda_um);
  return r.ordinary->index(lambda_um);
}

double CrystalDatabase::index_e_principal(CrystalId id, double lambda_um) const {
  const auto& r = dispersive(id);
  check_wavelength(r, lambda_um);
  return r.extraordinary->index(lambda_um);
}

namespace {

void check_angle(CrystalId id, double angle_deg) {
  if (!(angle_deg >= 0.0 && angle_deg <= 90.0))
    throw Error(Errc::out_of_range, std::string(name(id)) + ": angle " + std::to_string(angle_deg) + "° outside [0°, 90°]");
}

}  // namespace

double CrystalDatabase::index_e(CrystalId id, double lambda_um, double angle_deg) const {
  const auto& r = dispersive(id);
  check_wavelength(r, lambda_um);
  check_angle(id, angle_deg);
  // 1/n² = cos²φ/n_o² + sin²φ/n_e²
  const double c = std::cos(deg_to_rad(angle_deg));
  const double s = std::sin(deg_to_rad(angle_deg));
  const double inv = c * c / r.ordinary->n_squared(lambda_um) + s * s / r.extraordinary->n_squared(lambda_um);
  return 1.0 / std::sqrt(inv);
}

double CrystalDatabase::index(CrystalId id, Polarization pol, double lambda_um) const {
  return pol.kind == Polarization::Kind::ordinary ? index_o(id, lambda_um) : index_e(id, lambda_um, pol.angle_deg);
}

double CrystalDatabase::dindex(CrystalId id, Polarization pol, double lambda_um) const {
  const auto& r = dispersive(id);
  check_wavelength(r, lambda_um);
  if (pol.kind == Polarization::Kind::ordinary) return r.ordinary->dindex(lambda_um);
  check_angle(id, pol.angle_deg);
  const double c = std::cos(deg_to_rad(pol.angle_deg));
  const double s = std::sin(deg_to_rad(pol.angle_deg));
  const double no = r.ordinary->index(lambda_um);
  const double ne = r.extraordinary->index(lambda_um);
  const double n = 1.0 / std::sqrt(c * c / (no * no) + s * s / (ne * ne));
  // dn/dλ = n³ (cos²φ n_o'/n_o³ + sin²φ n_e'/n_e³)
  return n * n * n *
         (c * c * r.ordinary->dindex(lambda_um) / (no * no * no) +
          s * s * r.extraordinary->dindex(lambda_um) / (ne * ne * ne));
}

double CrystalDatabase::inverse_group_velocity(CrystalId id, Polarization pol, double lambda_um) const {
  const auto& r = dispersive(id);
  if (!(lambda_um > r.min_um() && lambda_um < r.max_um())) {
    std::ostringstream msg;
    msg << name(id) << ": wavelength " << lambda_um << " µm not strictly inside dispersion range [" << r.min_um()
        << ", " << r.max_um() << "] µm";
    throw Error(Errc::out_of_range, msg.str());
  }
  const double n = index(id, pol, lambda_um);
  const double dn = dindex(id, pol, lambda_um);
  return (n - lambda_um * dn) / speed_of_light;
}

}  // namespace kdpspdc
