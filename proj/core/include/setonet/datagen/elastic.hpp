#pragma once

#include <string>

#include "setonet/bundle.hpp"
#include "setonet/datagen/dataset.hpp"

namespace setonet {

// Minimal .npy support: little-endian float64/float32/int64, C order.
Array read_npy(const std::string& path);
void write_npy(const std::string& path, const Array& a);

// Reads <dir>/{train_loads, test_loads, nodes, train_ux, test_ux}.npy and,
// if present, load_locations.npy ([M, 2]). Without it the sensors sit on the
// right edge of the node bounding box, equally spaced in y. Loads and
// displacements are standardized with training-split statistics; coordinates
// are left as they are.
struct ElasticData {
  OperatorDataset train;
  OperatorDataset test;
};

ElasticData load_elastic_dataset(const std::string& dir);

double standardize(double x, double mean, double sd);
double destandardize(double z, double mean, double sd);

}  // namespace setonet
