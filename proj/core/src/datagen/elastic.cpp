#include "setonet/datagen/elastic.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>

#include "setonet/errors.hpp"

namespace setonet {

namespace {

[[noreturn]] void malformed(const std::string& path, const std::string& why) {
  throw DatasetError(DatasetError::Kind::bad_magic, path + ": " + why);
}

std::vector<std::int64_t> parse_shape(const std::string& header, const std::string& path) {
  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))"))) malformed(path, "no shape in header");
  std::vector<std::int64_t> shape;
  std::string body = m[1];
  std::regex num(R"(\d+)");
  for (auto it = std::sregex_iterator(body.begin(), body.end(), num); it != std::sregex_iterator(); ++it)
    shape.push_back(std::stoll(it->str()));
  return shape;
}

}  // namespace

Array read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetError::Kind::missing_file, "cannot open '" + path + "'");
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0) malformed(path, "not an .npy file");
  unsigned char ver[2];
  in.read(reinterpret_cast<char*>(ver), 2);
  std::uint32_t hlen = 0;
  if (ver[0] == 1) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    hlen = b[0] | (b[1] << 8);
  } else {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    hlen = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) malformed(path, "truncated header");
  if (header.find("'fortran_order': True") != std::string::npos) malformed(path, "Fortran order is not supported");

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']*)')"))) malformed(path, "no dtype in header");
  const std::string descr = m[1];
  Array a;
  a.shape = parse_shape(header, path);
  const std::int64_t n = a.numel();
  a.data.resize(n);
  if (descr == "<f8") {
    in.read(reinterpret_cast<char*>(a.data.data()), n * 8);
  } else if (descr == "<f4") {
    std::vector<float> tmp(n);
    in.read(reinterpret_cast<char*>(tmp.data()), n * 4);
    for (std::int64_t i = 0; i < n; ++i) a.data[i] = tmp[i];
  } else if (descr == "<i8") {
    std::vector<std::int64_t> tmp(n);
    in.read(reinterpret_cast<char*>(tmp.data()), n * 8);
    for (std::int64_t i = 0; i < n; ++i) a.data[i] = static_cast<double>(tmp[i]);
  } else {
    malformed(path, "unsupported dtype '" + descr + "'");
  }
  if (!in) malformed(path, "truncated data");
  return a;
}

void write_npy(const std::string& path, const Array& a) {
  std::string shape = "(";
  for (std::size_t i = 0; i < a.shape.size(); ++i) shape += std::to_string(a.shape[i]) + (a.shape.size() == 1 ? "," : i + 1 < a.shape.size() ? ", " : "");
  shape += ")";
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape + ", }";
  const std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header += '\n';
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write("\x93NUMPY\x01\x00", 8);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(hlen & 0xff));
  out.put(static_cast<char>(hlen >> 8));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(a.data.data()), static_cast<std::streamsize>(a.data.size() * 8));
}

double standardize(double x, double mean, double sd) { return (x - mean) / sd; }
double destandardize(double z, double mean, double sd) { return z * sd + mean; }

ElasticData load_elastic_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  auto load = [&](const std::string& name) { return read_npy((fs::path(dir) / (name + ".npy")).string()); };
  const BenchmarkCard base = benchmark_card("elastic");
  auto shape_error = [&](const std::string& what) {
    throw DatasetError(DatasetError::Kind::shape, "elastic dataset '" + dir + "': " + what);
  };

  Array loads[2] = {load("train_loads"), load("test_loads")};
  Array ux[2] = {load("train_ux"), load("test_ux")};
  Array nodes = load("nodes");
  if (nodes.shape.size() != 2 || nodes.dim(1) != 2) shape_error("nodes must be [Nq, 2]");
  if (nodes.dim(0) != base.nq) shape_error("expected " + std::to_string(base.nq) + " mesh nodes");
  for (int s = 0; s < 2; ++s) {
    if (loads[s].shape.size() != 2 || loads[s].dim(1) != base.m)
      shape_error("loads must be [N, " + std::to_string(base.m) + "]");
    if (ux[s].shape.size() != 2 || ux[s].dim(0) != loads[s].dim(0) || ux[s].dim(1) != base.nq)
      shape_error("displacements must be [N, " + std::to_string(base.nq) + "] matching the loads");
  }

  const Mat node_mat = nodes.as_mat();
  Mat sensor_loc(base.m, 2);
  const fs::path loc_path = fs::path(dir) / "load_locations.npy";
  if (fs::exists(loc_path)) {
    Array l = read_npy(loc_path.string());
    if (l.shape != std::vector<std::int64_t>{base.m, 2}) shape_error("load_locations must be [M, 2]");
    sensor_loc = l.as_mat();
  } else {
    const double xr = node_mat.col(0).maxCoeff();
    const Vec ys = Vec::LinSpaced(base.m, node_mat.col(1).minCoeff(), node_mat.col(1).maxCoeff());
    sensor_loc.col(0).setConstant(xr);
    sensor_loc.col(1) = ys;
  }

  auto stats = [](const Array& a) {
    double mean = 0.0;
    for (double v : a.data) mean += v;
    mean /= static_cast<double>(a.data.size());
    double var = 0.0;
    for (double v : a.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.data.size());
    return std::pair{mean, std::sqrt(var)};
  };
  Normalization norm;
  norm.enabled = true;
  std::tie(norm.input_mean, norm.input_std) = stats(loads[0]);
  std::tie(norm.target_mean, norm.target_std) = stats(ux[0]);
  if (!(norm.input_std > 0.0) || !(norm.target_std > 0.0)) shape_error("training fields have zero variance");

  BenchmarkCard card = base;
  for (int d = 0; d < 2; ++d) {
    const double lo = std::min(node_mat.col(d).minCoeff(), sensor_loc.col(d).minCoeff());
    const double hi = std::max(node_mat.col(d).maxCoeff(), sensor_loc.col(d).maxCoeff());
    card.input_domain.lo[d] = card.output_domain.lo[d] = lo;
    card.input_domain.hi[d] = card.output_domain.hi[d] = hi;
  }

  ElasticData out;
  OperatorDataset* ds[2] = {&out.train, &out.test};
  const char* names[2] = {"train", "test"};
  for (int s = 0; s < 2; ++s) {
    const std::int64_t n = loads[s].dim(0);
    ds[s]->card = card;
    ds[s]->card.train_size = static_cast<int>(loads[0].dim(0));
    ds[s]->card.test_size = static_cast<int>(loads[1].dim(0));
    ds[s]->split = names[s];
    ds[s]->normalization = norm;
    Array v({n, base.m, 1}, loads[s].data);
    for (double& x : v.data) x = standardize(x, norm.input_mean, norm.input_std);
    Array t({n, base.nq, 1}, ux[s].data);
    for (double& x : t.data) x = standardize(x, norm.target_mean, norm.target_std);
    ds[s]->arrays.set("sensor_locations", Array::from_mat(sensor_loc));
    ds[s]->arrays.set("sensor_values", std::move(v));
    ds[s]->arrays.set("query_points", nodes);
    ds[s]->arrays.set("targets", std::move(t));
    ds[s]->validate();
  }
  return out;
}

}  // namespace setonet
