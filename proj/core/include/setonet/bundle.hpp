#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "setonet/linalg.hpp"

namespace setonet {

// Dense row-major float64 array of arbitrary rank.
struct Array {
  std::vector<std::int64_t> shape;
  std::vector<double> data;

  Array() = default;
  Array(std::vector<std::int64_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

  static Array from_mat(const Mat& m);
  static Array from_vec(const Vec& v);
  static Array scalar(double x) { return Array({}, {x}); }

  std::int64_t numel() const;
  std::int64_t dim(std::size_t i) const { return shape.at(i); }
  // First axis as rows, remaining axes flattened into columns.
  Mat as_mat() const;
  Eigen::Map<const Mat> view() const;
};

std::uint32_t crc32_of(const Array& a);

// Ordered collection of named arrays written as one binary file.
class ArrayBundle {
public:
  void set(const std::string& name, Array a);
  bool has(const std::string& name) const;
  const Array& get(const std::string& name) const;
  const std::vector<std::pair<std::string, Array>>& items() const { return items_; }

private:
  std::vector<std::pair<std::string, Array>> items_;
};

inline constexpr std::uint32_t kBundleVersion = 1;

void write_bundle(const std::string& path, const ArrayBundle& b);
ArrayBundle read_bundle(const std::string& path);

}  // namespace setonet
