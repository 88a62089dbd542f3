#pragma once

// PFLD binary field files.
//
// Little-endian layout: magic "PFLD", u32 version, u32 d, d*d int64 entries
// of M (row-major), u32 component count D, u32 domain flag (0 space,
// 1 frequency), then m*D float64 values, node-major in pattern order.

#include "tihom/lattice.hpp"
#include "tihom/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace tihom {

enum class FieldDomain : std::uint32_t { Space = 0, Frequency = 1 };

struct FieldFile {
  static constexpr std::uint32_t kVersion = 1;

  PatternMatrix lattice{IMat::Identity(1, 1)};
  std::uint32_t components = 0;
  FieldDomain domain = FieldDomain::Space;
  std::vector<double> values;  // node-major

  /// Real field as an m x D strain matrix.
  StrainField as_strain() const;
};

/// Writes the real part of a field.
void write_field(const std::filesystem::path& path, const PatternMatrix& M, const StrainField& field,
                 FieldDomain domain = FieldDomain::Space);
/// Throws IngestionError on malformed files.
FieldFile read_field(const std::filesystem::path& path);

}  // namespace tihom
