#include "tihom/field_io.hpp"

#include "tihom/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tihom {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'L', 'D'};

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& what) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw IngestionError("truncated field file while reading " + what);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

StrainField FieldFile::as_strain() const {
  const auto m = static_cast<Eigen::Index>(lattice.size());
  const auto D = static_cast<Eigen::Index>(components);
  StrainField out(m, D);
  for (Eigen::Index y = 0; y < m; ++y) {
    for (Eigen::Index c = 0; c < D; ++c) out(y, c) = values[static_cast<std::size_t>(y * D + c)];
  }
  return out;
}

void write_field(const std::filesystem::path& path, const PatternMatrix& M, const StrainField& field,
                 FieldDomain domain) {
  if (field.rows() != M.size()) throw ShapeError("field has " + std::to_string(field.rows()) + " rows, pattern has " +
                                                 std::to_string(M.size()));
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IngestionError("cannot open '" + path.string() + "' for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, FieldFile::kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(M.dim()));
  for (int i = 0; i < M.dim(); ++i) {
    for (int j = 0; j < M.dim(); ++j) put<std::int64_t>(os, M.entries()(i, j));
  }
  put<std::uint32_t>(os, static_cast<std::uint32_t>(field.cols()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(domain));
  for (Eigen::Index y = 0; y < field.rows(); ++y) {
    for (Eigen::Index c = 0; c < field.cols(); ++c) put<double>(os, field(y, c).real());
  }
  if (!os) throw IngestionError("failed writing '" + path.string() + "'");
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestionError("cannot open field file '" + path.string() + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IngestionError("'" + path.string() + "' is not a PFLD field file");
  }
  const auto version = get<std::uint32_t>(is, "version");
  if (version != FieldFile::kVersion) throw IngestionError("unsupported PFLD version " + std::to_string(version));
  const auto d = get<std::uint32_t>(is, "dimension");
  if (d < 1 || d > 3) throw IngestionError("PFLD dimension must be 1, 2 or 3, got " + std::to_string(d));
  IMat M(d, d);
  for (std::uint32_t i = 0; i < d; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) M(i, j) = get<std::int64_t>(is, "pattern matrix");
  }
  FieldFile file;
  try {
    file.lattice = PatternMatrix(M);
  } catch (const Error& e) {
    throw IngestionError(std::string("PFLD header holds an invalid pattern matrix: ") + e.what());
  }
  file.components = get<std::uint32_t>(is, "component count");
  if (file.components == 0 || file.components > 6) throw IngestionError("PFLD component count out of range");
  const auto domain = get<std::uint32_t>(is, "domain flag");
  if (domain > 1) throw IngestionError("PFLD domain flag must be 0 or 1");
  file.domain = static_cast<FieldDomain>(domain);
  const auto count = static_cast<std::size_t>(file.lattice.size()) * file.components;
  file.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) file.values[i] = get<double>(is, "values");
  if (is.peek() != std::char_traits<char>::eof()) throw IngestionError("trailing bytes after PFLD payload");
  return file;
}

}  // namespace tihom
