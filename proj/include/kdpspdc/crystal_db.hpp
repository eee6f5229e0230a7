#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kdpspdc/sellmeier.hpp"

namespace kdpspdc {

enum class CrystalId { KDP, DKDP, ADP, DADP, ADA, DADA, RDA, DRDA, RDP, DRDP, KDA, DKDA, CDA, DCDA };

inline constexpr std::array<CrystalId, 14> all_crystals = {
    CrystalId::KDP, CrystalId::DKDP, CrystalId::ADP, CrystalId::DADP, CrystalId::ADA,
    CrystalId::DADA, CrystalId::RDA, CrystalId::DRDA, CrystalId::RDP, CrystalId::DRDP,
    CrystalId::KDA, CrystalId::DKDA, CrystalId::CDA, CrystalId::DCDA};

std::string_view name(CrystalId id);
std::optional<CrystalId> parse_crystal(std::string_view name);
bool is_deuterated(CrystalId id);

enum class CrystalFlag : unsigned {
  no_dispersion_data = 1u << 0,
  no_gvm_solution = 1u << 1,
  // Coefficients exist in the literature but are not yet in this data file.
  coefficients_pending = 1u << 2,
};

std::string_view flag_name(CrystalFlag flag);
std::optional<CrystalFlag> parse_flag(std::string_view name);
inline constexpr std::array<CrystalFlag, 3> all_flags = {
    CrystalFlag::no_dispersion_data, CrystalFlag::no_gvm_solution, CrystalFlag::coefficients_pending};

struct CrystalRecord {
  CrystalId id = CrystalId::KDP;
  std::optional<SellmeierEntry> ordinary;
  std::optional<SellmeierEntry> extraordinary;  // principal index n_e(90°)
  std::map<std::string, double> d_eff_pm_per_v;  // metadata only
  unsigned flags = 0;

  bool has(CrystalFlag f) const { return (flags & static_cast<unsigned>(f)) != 0; }
  bool has_dispersion() const { return ordinary.has_value() && extraordinary.has_value(); }
  /// Intersection of the ordinary and extraordinary validity ranges.
  double min_um() const;
  double max_um() const;
};

/// Ray polarisation; the angle is measured from the optic axis and only
/// matters for the extraordinary ray.
struct Polarization {
  enum class Kind { ordinary, extraordinary };
  Kind kind = Kind::ordinary;
  double angle_deg = 0.0;

  static Polarization ordinary() { return {Kind::ordinary, 0.0}; }
  static Polarization extraordinary(double angle_deg) { return {Kind::extraordinary, angle_deg}; }
};

/// Immutable after construction; every query is const and thread-safe.
class CrystalDatabase {
 public:
  explicit CrystalDatabase(std::vector<CrystalRecord> records, std::string version = {});

  static CrystalDatabase load(const std::filesystem::path& path);
  static CrystalDatabase parse(std::string_view text, std::string_view origin = "<memory>");
  std::string serialize() const;

  const std::vector<CrystalRecord>& records() const { return records_; }
  bool contains(CrystalId id) const;
  const CrystalRecord& at(CrystalId id) const;
  /// Like at(), but raises Errc::no_dispersion_data for records without
  /// Sellmeier entries.
  const CrystalRecord& dispersive(CrystalId id) const;
  /// Version label from the file plus a content hash, e.g. "1.0.0+9f3c...".
  const std::string& version() const { return version_; }

  double index_o(CrystalId id, double lambda_um) const;
  double index_e_principal(CrystalId id, double lambda_um) const;
  double index_e(CrystalId id, double lambda_um, double angle_deg) const;
  double index(CrystalId id, Polarization pol, double lambda_um) const;
  /// dn/dλ in 1/µm, angle held fixed.
  double dindex(CrystalId id, Polarization pol, double lambda_um) const;
  /// k'(ω) = (n − λ dn/dλ)/c in s/m; λ must lie strictly inside the range.
  double inverse_group_velocity(CrystalId id, Polarization pol, double lambda_um) const;

 private:
  void check_wavelength(const CrystalRecord& r, double lambda_um) const;

  std::vector<CrystalRecord> records_;
  std::string version_;
};

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace kdpspdc
