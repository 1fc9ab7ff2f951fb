#include "setonet/datagen/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "setonet/errors.hpp"

namespace setonet {

using nlohmann::json;

namespace {

// Slice i of a rank-3 array as a matrix, or the whole rank-2 array when shared.
Mat slice(const Array& a, Eigen::Index i, bool shared) {
  if (shared) return a.as_mat();
  const std::int64_t rows = a.dim(1);
  const std::int64_t cols = a.shape.size() > 2 ? a.dim(2) : 1;
  return Eigen::Map<const Mat>(a.data.data() + i * rows * cols, rows, cols);
}

json normalization_to_json(const Normalization& n) {
  return {{"enabled", n.enabled},
          {"input_mean", n.input_mean},
          {"input_std", n.input_std},
          {"target_mean", n.target_mean},
          {"target_std", n.target_std}};
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key))
    throw DatasetError(DatasetError::Kind::missing_key, where + ": missing metadata key '" + key + "'");
  return j.at(key);
}

}  // namespace

Eigen::Index OperatorDataset::size() const { return arrays.get("sensor_values").dim(0); }
Eigen::Index OperatorDataset::m() const { return arrays.get("sensor_values").dim(1); }
Eigen::Index OperatorDataset::nq() const { return arrays.get("targets").dim(1); }
bool OperatorDataset::shared_sensors() const { return arrays.get("sensor_locations").shape.size() == 2; }
bool OperatorDataset::shared_queries() const { return arrays.get("query_points").shape.size() == 2; }

Mat OperatorDataset::locations(Eigen::Index i) const {
  return slice(arrays.get("sensor_locations"), i, shared_sensors());
}
Mat OperatorDataset::values(Eigen::Index i) const { return slice(arrays.get("sensor_values"), i, false); }
Mat OperatorDataset::query_points(Eigen::Index i) const {
  return slice(arrays.get("query_points"), i, shared_queries());
}
Mat OperatorDataset::targets(Eigen::Index i) const { return slice(arrays.get("targets"), i, false); }

SensorSet OperatorDataset::sensor_set(Eigen::Index i) const {
  SensorSet s;
  s.locations = locations(i);
  s.values = values(i);
  s.weights = sensor_weights(s.locations, card.input_domain);
  return s;
}

void OperatorDataset::validate() const {
  auto bad = [](const std::string& what) { throw DatasetError(DatasetError::Kind::shape, "dataset: " + what); };
  const Array& loc = arrays.get("sensor_locations");
  const Array& val = arrays.get("sensor_values");
  const Array& qp = arrays.get("query_points");
  const Array& tg = arrays.get("targets");
  if (val.shape.size() != 3 || tg.shape.size() != 3) bad("sensor_values and targets must be rank 3");
  const std::int64_t n = val.dim(0);
  if (tg.dim(0) != n) bad("targets and sensor_values disagree on the sample count");
  if (val.dim(2) != card.du) bad("sensor_values last axis must equal d_u");
  if (tg.dim(2) != card.dout) bad("targets last axis must equal d_out");
  if (loc.shape.size() == 2) {
    if (loc.dim(0) != val.dim(1) || loc.dim(1) != card.dx) bad("shared sensor_locations must be [M, d_x]");
  } else if (loc.shape.size() == 3) {
    if (loc.dim(0) != n || loc.dim(1) != val.dim(1) || loc.dim(2) != card.dx)
      bad("sensor_locations must be [N, M, d_x]");
  } else {
    bad("sensor_locations must be rank 2 or 3");
  }
  if (qp.shape.size() == 2) {
    if (qp.dim(0) != tg.dim(1) || qp.dim(1) != card.dy) bad("shared query_points must be [Nq, d_y]");
  } else if (qp.shape.size() == 3) {
    if (qp.dim(0) != n || qp.dim(1) != tg.dim(1) || qp.dim(2) != card.dy) bad("query_points must be [N, Nq, d_y]");
  } else {
    bad("query_points must be rank 2 or 3");
  }
}

std::string dataset_bundle_path(const std::string& dir, const std::string& split) {
  return (std::filesystem::path(dir) / (split + ".bin")).string();
}

std::string dataset_sidecar_path(const std::string& dir, const std::string& split) {
  return (std::filesystem::path(dir) / (split + ".json")).string();
}

std::vector<std::pair<std::string, std::uint32_t>> dataset_checksums(const OperatorDataset& ds) {
  std::vector<std::pair<std::string, std::uint32_t>> out;
  for (const auto& [name, a] : ds.arrays.items()) out.emplace_back(name, crc32_of(a));
  return out;
}

void write_dataset(const std::string& dir, const OperatorDataset& ds) {
  ds.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory '" + dir + "': " + ec.message());

  json meta;
  meta["format"] = "setonet-dataset";
  meta["version"] = kDatasetVersion;
  meta["generator_version"] = kGeneratorVersion;
  meta["card"] = json::parse(card_to_json(ds.card));
  meta["split"] = ds.split;
  meta["seed"] = ds.seed;
  meta["size"] = ds.size();
  json arrays = json::object();
  for (const auto& [name, a] : ds.arrays.items()) arrays[name] = {{"shape", a.shape}, {"crc32", crc32_of(a)}};
  meta["arrays"] = arrays;
  meta["normalization"] = normalization_to_json(ds.normalization);

  write_bundle(dataset_bundle_path(dir, ds.split), ds.arrays);
  const std::string side = dataset_sidecar_path(dir, ds.split);
  std::ofstream out(side);
  if (!out) throw IoError("cannot write '" + side + "'");
  out << meta.dump(2) << "\n";
}

OperatorDataset read_dataset(const std::string& dir, const std::string& split) {
  const std::string side = dataset_sidecar_path(dir, split);
  std::ifstream in(side);
  if (!in) throw DatasetError(DatasetError::Kind::missing_file, "missing dataset metadata '" + side + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json meta;
  try {
    meta = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw DatasetError(DatasetError::Kind::bad_magic, side + ": invalid JSON: " + e.what());
  }
  for (const char* key : {"format", "version", "generator_version", "card", "split", "seed", "arrays", "normalization"})
    require(meta, key, side);
  if (meta["format"] != "setonet-dataset")
    throw DatasetError(DatasetError::Kind::bad_magic, side + ": not a setonet dataset");
  if (meta["version"].get<int>() != kDatasetVersion)
    throw DatasetError(DatasetError::Kind::version_mismatch,
                       side + ": version " + meta["version"].dump() + ", expected " + std::to_string(kDatasetVersion));

  OperatorDataset ds;
  ds.card = card_from_json(meta["card"].dump());
  ds.split = meta["split"].get<std::string>();
  ds.seed = meta["seed"].get<std::uint64_t>();
  const json& nj = meta["normalization"];
  for (const char* key : {"enabled", "input_mean", "input_std", "target_mean", "target_std"}) require(nj, key, side);
  ds.normalization.enabled = nj["enabled"].get<bool>();
  ds.normalization.input_mean = nj["input_mean"].get<double>();
  ds.normalization.input_std = nj["input_std"].get<double>();
  ds.normalization.target_mean = nj["target_mean"].get<double>();
  ds.normalization.target_std = nj["target_std"].get<double>();

  ds.arrays = read_bundle(dataset_bundle_path(dir, split));
  const json& aj = meta["arrays"];
  for (const auto& [name, entry] : aj.items()) {
    if (!ds.arrays.has(name))
      throw DatasetError(DatasetError::Kind::missing_key, side + ": array '" + name + "' absent from the bundle");
    const Array& a = ds.arrays.get(name);
    if (require(entry, "shape", side).get<std::vector<std::int64_t>>() != a.shape)
      throw DatasetError(DatasetError::Kind::shape, side + ": shape mismatch for '" + name + "'");
    if (require(entry, "crc32", side).get<std::uint32_t>() != crc32_of(a))
      throw DatasetError(DatasetError::Kind::checksum, side + ": checksum mismatch for '" + name + "'");
  }
  for (const auto& [name, a] : ds.arrays.items())
    if (!aj.contains(name))
      throw DatasetError(DatasetError::Kind::missing_key, side + ": no metadata for array '" + name + "'");
  ds.validate();
  return ds;
}

}  // namespace setonet
