#pragma once

#include <memory>
#include <string>

#include "setonet/batch.hpp"
#include "setonet/branch.hpp"
#include "setonet/datagen/benchmarks.hpp"
#include "setonet/trunk.hpp"

namespace setonet {

struct ModelConfig {
  BranchConfig branch;
  TrunkConfig trunk;

  void validate() const;
};

// Defaults for a benchmark family and branch variant.
ModelConfig default_model_config(const BenchmarkCard& card, BranchVariant variant);

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

class Model {
public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  // Predictions stacked per sample: size*N rows, d_out columns.
  NodeId forward(Tape& tape, const Batch& batch);
  Mat predict(const Batch& batch);

  void visit(const ParamVisitor& f);
  long long param_count();

  const ModelConfig& config() const { return cfg_; }
  Branch& branch() { return *branch_; }
  Trunk& trunk() { return trunk_; }

private:
  ModelConfig cfg_;
  std::unique_ptr<Branch> branch_;
  Trunk trunk_;
};

// Checkpoint = array bundle of parameters (path) + JSON sidecar (path.json)
// holding the model config and caller metadata.
void save_checkpoint(const std::string& path, Model& model, const std::string& meta_json = "{}");
std::unique_ptr<Model> load_checkpoint(const std::string& path, std::string* meta_json = nullptr);

}  // namespace setonet
