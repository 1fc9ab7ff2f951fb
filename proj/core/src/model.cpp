#include "setonet/model.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "setonet/bundle.hpp"
#include "setonet/errors.hpp"

namespace setonet {

using nlohmann::json;

void ModelConfig::validate() const {
  branch.validate();
  trunk.validate();
  SETONET_REQUIRE(branch.p == trunk.p, "model: branch and trunk disagree on p");
  SETONET_REQUIRE(branch.dout == trunk.dout, "model: branch and trunk disagree on d_out");
}

ModelConfig default_model_config(const BenchmarkCard& card, BranchVariant variant) {
  ModelConfig cfg;
  BranchConfig& b = cfg.branch;
  b.variant = variant;
  b.dx = card.dx;
  b.du = card.du;
  b.dout = card.dout;
  b.p = card.p;
  b.pe = PositionalEncodingConfig{64, card.pe_max, card.dx};
  b.mix = card.mix;
  b.augment_values_with_coords = card.augment_values_with_coords;
  b.key_hidden = {card.key_hidden};
  b.rho_tok_hidden = {card.key_hidden};
  b.rho_hidden = {card.rho_hidden};
  b.m_fixed = card.m;

  TrunkConfig& t = cfg.trunk;
  t.dy = card.dy;
  t.p = card.p;
  t.dout = card.dout;
  if (variant == BranchVariant::deeponet || variant == BranchVariant::vidon) t.hidden = {256, 256, 256, 256};
  t.tau0 = variant == BranchVariant::vidon;
  return cfg;
}

namespace {

json branch_json(const BranchConfig& b) {
  return {{"variant", to_string(b.variant)},
          {"dx", b.dx},
          {"du", b.du},
          {"dout", b.dout},
          {"p", b.p},
          {"act", to_string(b.act)},
          {"pe", {{"embed_dim", b.pe.embed_dim}, {"max_scale", b.pe.max_scale}, {"coordinate_dim", b.pe.coordinate_dim}}},
          {"d_k", b.d_k},
          {"d_v", b.d_v},
          {"n_pool", b.n_pool},
          {"mix", to_string(b.mix)},
          {"augment_values_with_coords", b.augment_values_with_coords},
          {"key_uses_raw_coords", b.key_uses_raw_coords},
          {"key_hidden", b.key_hidden},
          {"value_hidden", b.value_hidden},
          {"rho_tok_hidden", b.rho_tok_hidden},
          {"heads", b.heads},
          {"phi_hidden", b.phi_hidden},
          {"rho_hidden", b.rho_hidden},
          {"m_fixed", b.m_fixed},
          {"deeponet_hidden", b.deeponet_hidden},
          {"vidon_enc", b.vidon_enc},
          {"vidon_enc_hidden", b.vidon_enc_hidden},
          {"vidon_head_hidden", b.vidon_head_hidden},
          {"vidon_head_out", b.vidon_head_out},
          {"vidon_out_hidden", b.vidon_out_hidden}};
}

BranchConfig branch_from_json(const json& j) {
  BranchConfig b;
  b.variant = branch_variant_from_string(j.at("variant").get<std::string>());
  b.dx = j.at("dx");
  b.du = j.at("du");
  b.dout = j.at("dout");
  b.p = j.at("p");
  b.act = activation_from_string(j.at("act").get<std::string>());
  b.pe.embed_dim = j.at("pe").at("embed_dim");
  b.pe.max_scale = j.at("pe").at("max_scale");
  b.pe.coordinate_dim = j.at("pe").at("coordinate_dim");
  b.d_k = j.at("d_k");
  b.d_v = j.at("d_v");
  b.n_pool = j.at("n_pool");
  b.mix = activation_from_string(j.at("mix").get<std::string>());
  b.augment_values_with_coords = j.at("augment_values_with_coords");
  b.key_uses_raw_coords = j.at("key_uses_raw_coords");
  b.key_hidden = j.at("key_hidden").get<std::vector<int>>();
  b.value_hidden = j.at("value_hidden").get<std::vector<int>>();
  b.rho_tok_hidden = j.at("rho_tok_hidden").get<std::vector<int>>();
  b.heads = j.at("heads");
  b.phi_hidden = j.at("phi_hidden").get<std::vector<int>>();
  b.rho_hidden = j.at("rho_hidden").get<std::vector<int>>();
  b.m_fixed = j.at("m_fixed");
  b.deeponet_hidden = j.at("deeponet_hidden").get<std::vector<int>>();
  b.vidon_enc = j.at("vidon_enc");
  b.vidon_enc_hidden = j.at("vidon_enc_hidden").get<std::vector<int>>();
  b.vidon_head_hidden = j.at("vidon_head_hidden").get<std::vector<int>>();
  b.vidon_head_out = j.at("vidon_head_out");
  b.vidon_out_hidden = j.at("vidon_out_hidden").get<std::vector<int>>();
  return b;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["branch"] = branch_json(cfg.branch);
  j["trunk"] = {{"dy", cfg.trunk.dy},
                {"p", cfg.trunk.p},
                {"dout", cfg.trunk.dout},
                {"hidden", cfg.trunk.hidden},
                {"act", to_string(cfg.trunk.act)},
                {"tau0", cfg.trunk.tau0}};
  return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ModelConfig cfg;
    cfg.branch = branch_from_json(j.at("branch"));
    const json& t = j.at("trunk");
    cfg.trunk.dy = t.at("dy");
    cfg.trunk.p = t.at("p");
    cfg.trunk.dout = t.at("dout");
    cfg.trunk.hidden = t.at("hidden").get<std::vector<int>>();
    cfg.trunk.act = activation_from_string(t.at("act").get<std::string>());
    cfg.trunk.tau0 = t.at("tau0");
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg.validate();
  Rng rng = Rng::stream(seed, 0x30de1u);
  branch_ = make_branch(cfg.branch, rng);
  trunk_ = Trunk(cfg.trunk, rng);
}

NodeId Model::forward(Tape& tape, const Batch& batch) {
  const auto& q = batch.queries;
  if (q.size != batch.sensors.size) throw ValidationError("model: sensor and query batches differ in size");
  BranchOutput br = branch_->forward(tape, batch.sensors);
  TrunkOutput tr = trunk_.forward(tape, q.points);
  return tape.synthesize(br.coef, tr.basis, tr.tau0, br.bias, q.size, cfg_.trunk.p, cfg_.trunk.dout,
                         q.shared_queries);
}

Mat Model::predict(const Batch& batch) {
  Tape tape(false);
  return tape.value(forward(tape, batch));
}

void Model::visit(const ParamVisitor& f) {
  branch_->visit(f);
  trunk_.visit(f);
}

long long Model::param_count() {
  return count_params([this](const ParamVisitor& f) { visit(f); });
}

void save_checkpoint(const std::string& path, Model& model, const std::string& meta_json) {
  ArrayBundle b;
  model.visit([&b](Param& p) { b.set(p.name, Array::from_mat(p.value)); });
  write_bundle(path, b);
  json side;
  side["format"] = "setonet-checkpoint";
  side["model"] = json::parse(model_config_to_json(model.config()));
  try {
    side["meta"] = json::parse(meta_json);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  std::ofstream out(path + ".json");
  if (!out) throw IoError("cannot write '" + path + ".json'");
  out << side.dump(2) << "\n";
}

std::unique_ptr<Model> load_checkpoint(const std::string& path, std::string* meta_json) {
  std::ifstream in(path + ".json");
  if (!in) throw IoError("cannot open checkpoint metadata '" + path + ".json'");
  std::stringstream ss;
  ss << in.rdbuf();
  json side;
  try {
    side = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  if (!side.contains("model")) throw IoError("checkpoint metadata lacks the model config");
  auto model = std::make_unique<Model>(model_config_from_json(side["model"].dump()), 0);
  const ArrayBundle b = read_bundle(path);
  model->visit([&b](Param& p) {
    const Array& a = b.get(p.name);
    if (a.shape.size() != 2 || a.shape[0] != p.value.rows() || a.shape[1] != p.value.cols())
      throw IoError("checkpoint parameter '" + p.name + "' has the wrong shape");
    p.value = a.as_mat();
    p.reset_state();
  });
  if (meta_json) *meta_json = side.contains("meta") ? side["meta"].dump() : "{}";
  return model;
}

}  // namespace setonet
