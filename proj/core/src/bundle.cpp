#include "setonet/bundle.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'T', 'O', 'N', 'E', 'T', 'B'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DatasetError(DatasetError::Kind::shape, "truncated bundle: " + path);
  return v;
}

}  // namespace

Array Array::from_mat(const Mat& m) {
  return Array({m.rows(), m.cols()}, std::vector<double>(m.data(), m.data() + m.size()));
}

Array Array::from_vec(const Vec& v) { return Array({v.size()}, std::vector<double>(v.data(), v.data() + v.size())); }

std::int64_t Array::numel() const {
  std::int64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

Mat Array::as_mat() const { return view(); }

Eigen::Map<const Mat> Array::view() const {
  const std::int64_t rows = shape.empty() ? 1 : shape[0];
  const std::int64_t cols = rows == 0 ? 0 : numel() / rows;
  return Eigen::Map<const Mat>(data.data(), rows, cols);
}

std::uint32_t crc32_of(const Array& a) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* bytes = reinterpret_cast<const Bytef*>(a.data.data());
  std::size_t left = a.data.size() * sizeof(double);
  while (left > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, bytes, chunk);
    bytes += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ArrayBundle::set(const std::string& name, Array a) {
  if (a.numel() != static_cast<std::int64_t>(a.data.size()))
    throw ValidationError("array '" + name + "': shape does not match data size");
  for (auto& [n, v] : items_)
    if (n == name) {
      v = std::move(a);
      return;
    }
  items_.emplace_back(name, std::move(a));
}

bool ArrayBundle::has(const std::string& name) const {
  for (const auto& [n, v] : items_)
    if (n == name) return true;
  return false;
}

const Array& ArrayBundle::get(const std::string& name) const {
  for (const auto& [n, v] : items_)
    if (n == name) return v;
  throw DatasetError(DatasetError::Kind::missing_key, "bundle has no array named '" + name + "'");
}

void write_bundle(const std::string& path, const ArrayBundle& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kBundleVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(b.items().size()));
  for (const auto& [name, a] : b.items()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(a.shape.size()));
    for (auto s : a.shape) put<std::int64_t>(out, s);
    out.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

ArrayBundle read_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetError::Kind::missing_file, "cannot open bundle '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DatasetError(DatasetError::Kind::bad_magic, "'" + path + "' is not a setonet array bundle");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kBundleVersion)
    throw DatasetError(DatasetError::Kind::version_mismatch,
                       "bundle '" + path + "' has version " + std::to_string(version) + ", expected " +
                           std::to_string(kBundleVersion));
  const auto n = get<std::uint32_t>(in, path);
  ArrayBundle b;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rank = get<std::uint32_t>(in, path);
    Array a;
    for (std::uint32_t r = 0; r < rank; ++r) a.shape.push_back(get<std::int64_t>(in, path));
    a.data.resize(static_cast<std::size_t>(a.numel()));
    in.read(reinterpret_cast<char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    if (!in) throw DatasetError(DatasetError::Kind::shape, "truncated bundle: " + path);
    b.set(name, std::move(a));
  }
  return b;
}

}  // namespace setonet
