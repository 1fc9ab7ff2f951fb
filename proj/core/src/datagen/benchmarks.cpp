#include "setonet/datagen/benchmarks.hpp"

#include <nlohmann/json.hpp>

#include "setonet/errors.hpp"

namespace setonet {

using nlohmann::json;

std::string to_string(BenchmarkKind k) {
  switch (k) {
    case BenchmarkKind::derivative: return "derivative";
    case BenchmarkKind::integral: return "integral";
    case BenchmarkKind::darcy1d: return "darcy1d";
    case BenchmarkKind::elastic: return "elastic";
    case BenchmarkKind::heat: return "heat";
    case BenchmarkKind::advdiff: return "advdiff";
    case BenchmarkKind::diffraction: return "diffraction";
    case BenchmarkKind::ot: return "ot";
  }
  return "?";
}

namespace {

BenchmarkKind kind_from_string(const std::string& s) {
  for (auto k : {BenchmarkKind::derivative, BenchmarkKind::integral, BenchmarkKind::darcy1d, BenchmarkKind::elastic,
                 BenchmarkKind::heat, BenchmarkKind::advdiff, BenchmarkKind::diffraction, BenchmarkKind::ot})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown benchmark kind '" + s + "'");
}

void point_cloud_defaults(BenchmarkCard& c) {
  c.dx = 2;
  c.dy = 2;
  c.p = 128;
  c.key_hidden = 256;
  c.rho_hidden = 256;
  c.mix = Activation::tanh;
  c.steps = 50000;
  c.batch_size = 32;
  c.milestones = {15000, 30000};
  c.factors = {0.2, 0.5};
}

}  // namespace

bool BenchmarkCard::structured_family() const {
  return kind == BenchmarkKind::derivative || kind == BenchmarkKind::integral || kind == BenchmarkKind::darcy1d ||
         kind == BenchmarkKind::elastic;
}

void BenchmarkCard::validate() const {
  auto fail = [this](const std::string& field, const std::string& why) {
    throw ValidationError("benchmark '" + name + "': " + field + " " + why);
  };
  if (input_domain.dim() != dx) fail("d_x", "does not match the input domain");
  if (output_domain.dim() != dy) fail("d_y", "does not match the output domain");
  for (int d = 0; d < input_domain.dim(); ++d)
    if (!(input_domain.lo[d] < input_domain.hi[d])) fail("input_domain", "must have lo < hi");
  if (du < 1 || dout < 1) fail("d_u/d_out", "must be >= 1");
  if (m < 1) fail("m", "must be >= 1");
  if (nq < 1) fail("nq", "must be >= 1");
  if (p < 1) fail("p", "must be >= 1");
  if (!(pe_max > 0.0)) fail("pe_max", "must be positive");
  if (steps < 1) fail("steps", "must be >= 1");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (milestones.size() != factors.size()) fail("milestones", "and factors must have equal length");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] <= 0) fail("milestones", "must be positive");
    if (i > 0 && milestones[i] <= milestones[i - 1]) fail("milestones", "must be strictly increasing");
    if (!(factors[i] > 0.0 && factors[i] <= 1.0)) fail("factors", "must lie in (0, 1]");
  }
  if (train_size < 0 || test_size < 0) fail("split sizes", "must be nonnegative");
  if (!(coef_range > 0.0)) fail("coef_range", "must be positive");
  if (!(length_scale > 0.0) || !(variance > 0.0)) fail("kernel", "length scale and variance must be positive");
  if (!(newton_tol > 0.0)) fail("newton_tol", "must be positive");
  if (!(softening >= 0.0)) fail("softening", "must be nonnegative");
  if (!(diffusivity > 0.0)) fail("diffusivity", "must be positive");
  if (velocity.size() != 2) fail("velocity", "must have two components");
  if (!(strength_lo > 0.0 && strength_lo < strength_hi)) fail("strengths", "need 0 < lo < hi");
  if (!(beta >= 0.0)) fail("beta", "must be nonnegative");
  if (seed_grid < 2 || proposal_grid < 2) fail("adaptive grids", "must have at least 2 points per side");
  if (!(t0 >= 0.0)) fail("t0", "must be nonnegative");
  if (!(sigma_env > 0.0) || !(bump_width > 0.0)) fail("diffraction widths", "must be positive");
  if (!(sinkhorn_eps > 0.0) || sinkhorn_iters < 1 || !(sinkhorn_tol > 0.0)) fail("sinkhorn", "settings must be positive");
  switch (kind) {
    case BenchmarkKind::darcy1d:
      if (grid_size < 3) fail("grid_size", "must be >= 3");
      if (m > grid_size || nq > grid_size) fail("m/nq", "cannot exceed the grid size");
      break;
    case BenchmarkKind::heat:
    case BenchmarkKind::advdiff:
      if (nq < seed_grid * seed_grid) fail("nq", "must cover the adaptive seed grid");
      if (nq - seed_grid * seed_grid > proposal_grid * proposal_grid - seed_grid * seed_grid)
        fail("nq", "exceeds the adaptive proposal grid");
      break;
    case BenchmarkKind::diffraction:
      if (grid_size < 2) fail("grid_size", "must be >= 2");
      if (nq != grid_size * grid_size) fail("nq", "must equal grid_size^2");
      if (du != 2 || dout != 2) fail("d_u/d_out", "must be 2 for diffraction");
      break;
    case BenchmarkKind::ot:
      if (grid_size < 2) fail("grid_size", "must be >= 2");
      break;
    default: break;
  }
}

BenchmarkCard benchmark_card(const std::string& name) {
  BenchmarkCard c;
  c.name = name;
  if (name == "derivative" || name == "integral") {
    c.kind = name == "derivative" ? BenchmarkKind::derivative : BenchmarkKind::integral;
    c.input_domain = c.output_domain = Domain::interval(-1.0, 1.0);
    c.m = 100;
    c.nq = 200;
    c.key_hidden = name == "derivative" ? 300 : 200;
    c.augment_values_with_coords = name == "derivative";
    c.test_size = 960;
    return c;
  }
  if (name == "darcy1d") {
    c.kind = BenchmarkKind::darcy1d;
    c.input_domain = c.output_domain = Domain::interval(0.0, 1.0);
    c.m = 300;
    c.nq = 300;
    c.grid_size = 501;
    c.train_size = 10000;
    c.test_size = 1000;
    return c;
  }
  if (name == "elastic") {
    c.kind = BenchmarkKind::elastic;
    c.input_domain = c.output_domain = Domain::box(0.0, 1.0, 2);
    c.dx = 2;
    c.dy = 2;
    c.m = 301;
    c.nq = 1048;
    c.p = 128;
    c.mix = Activation::tanh;
    c.train_size = 1900;
    c.test_size = 100;
    return c;
  }
  if (name == "heat10" || name == "heat30" || name == "heat") {
    point_cloud_defaults(c);
    c.kind = BenchmarkKind::heat;
    c.input_domain = c.output_domain = Domain::box(0.0, 1.0, 2);
    c.m = name == "heat10" ? 10 : 30;
    c.beta = name == "heat10" ? 9.0 : 8.0;
    c.nq = 8192;
    c.pe_max = 0.01;
    c.train_size = 10000;
    c.test_size = 1000;
    return c;
  }
  if (name == "advdiff") {
    point_cloud_defaults(c);
    c.kind = BenchmarkKind::advdiff;
    c.input_domain = c.output_domain = Domain::box(0.0, 1.0, 2);
    c.m = 30;
    c.nq = 4096;
    c.beta = 4.0;
    c.pe_max = 0.01;
    c.train_size = 10000;
    c.test_size = 1000;
    return c;
  }
  if (name == "diffraction") {
    point_cloud_defaults(c);
    c.kind = BenchmarkKind::diffraction;
    c.input_domain = c.output_domain = Domain::box(0.0, 1.0, 2);
    c.du = 2;
    c.dout = 2;
    c.m = 10;
    c.grid_size = 128;
    c.nq = 128 * 128;
    c.pe_max = 0.01;
    c.train_size = 20000;
    c.test_size = 1000;
    return c;
  }
  if (name == "ot") {
    point_cloud_defaults(c);
    c.kind = BenchmarkKind::ot;
    c.input_domain = c.output_domain = Domain::box(-5.0, 5.0, 2);
    c.du = 1;
    c.dout = 2;
    c.m = 512;
    c.nq = 1024;
    c.grid_size = 80;
    c.pe_max = 0.1;
    c.train_size = 20000;
    c.test_size = 1000;
    return c;
  }
  throw ValidationError("unknown benchmark '" + name + "' (known: derivative, integral, darcy1d, elastic, heat10, " +
                        "heat30, advdiff, diffraction, ot)");
}

std::vector<std::string> benchmark_names() {
  return {"derivative", "integral", "darcy1d", "elastic", "heat10", "heat30", "advdiff", "diffraction", "ot"};
}

std::string card_to_json(const BenchmarkCard& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  j["input_domain"] = {{"lo", c.input_domain.lo}, {"hi", c.input_domain.hi}};
  j["output_domain"] = {{"lo", c.output_domain.lo}, {"hi", c.output_domain.hi}};
  j["dx"] = c.dx;
  j["du"] = c.du;
  j["dy"] = c.dy;
  j["dout"] = c.dout;
  j["m"] = c.m;
  j["nq"] = c.nq;
  j["p"] = c.p;
  j["pe_max"] = c.pe_max;
  j["key_hidden"] = c.key_hidden;
  j["rho_hidden"] = c.rho_hidden;
  j["mix"] = to_string(c.mix);
  j["augment_values_with_coords"] = c.augment_values_with_coords;
  j["train_size"] = c.train_size;
  j["test_size"] = c.test_size;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["milestones"] = c.milestones;
  j["factors"] = c.factors;
  j["train_protocol"] = to_string(c.train_protocol);
  j["coef_range"] = c.coef_range;
  j["grid_size"] = c.grid_size;
  j["length_scale"] = c.length_scale;
  j["variance"] = c.variance;
  j["softening"] = c.softening;
  j["diffusivity"] = c.diffusivity;
  j["velocity"] = c.velocity;
  j["newton_tol"] = c.newton_tol;
  j["regularization_radius"] = c.regularization_radius;
  j["strength_lo"] = c.strength_lo;
  j["strength_hi"] = c.strength_hi;
  j["beta"] = c.beta;
  j["seed_grid"] = c.seed_grid;
  j["proposal_grid"] = c.proposal_grid;
  j["t0"] = c.t0;
  j["sigma_env"] = c.sigma_env;
  j["bump_width"] = c.bump_width;
  j["sinkhorn_eps"] = c.sinkhorn_eps;
  j["sinkhorn_iters"] = c.sinkhorn_iters;
  j["sinkhorn_tol"] = c.sinkhorn_tol;
  return j.dump(2);
}

BenchmarkCard card_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("benchmark card: invalid JSON: ") + e.what());
  }
  if (!j.contains("name")) throw ValidationError("benchmark card: missing field 'name'");
  BenchmarkCard c;
  const std::string name = j["name"].get<std::string>();
  try {
    c = benchmark_card(name);
  } catch (const ValidationError&) {
    c.name = name;
  }
  try {
    if (j.contains("kind")) c.kind = kind_from_string(j["kind"].get<std::string>());
    if (j.contains("input_domain")) {
      c.input_domain.lo = j["input_domain"].at("lo").get<std::vector<double>>();
      c.input_domain.hi = j["input_domain"].at("hi").get<std::vector<double>>();
    }
    if (j.contains("output_domain")) {
      c.output_domain.lo = j["output_domain"].at("lo").get<std::vector<double>>();
      c.output_domain.hi = j["output_domain"].at("hi").get<std::vector<double>>();
    }
    auto opt = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    opt("dx", c.dx);
    opt("du", c.du);
    opt("dy", c.dy);
    opt("dout", c.dout);
    opt("m", c.m);
    opt("nq", c.nq);
    opt("p", c.p);
    opt("pe_max", c.pe_max);
    opt("key_hidden", c.key_hidden);
    opt("rho_hidden", c.rho_hidden);
    if (j.contains("mix")) c.mix = activation_from_string(j["mix"].get<std::string>());
    opt("augment_values_with_coords", c.augment_values_with_coords);
    opt("train_size", c.train_size);
    opt("test_size", c.test_size);
    opt("steps", c.steps);
    opt("batch_size", c.batch_size);
    opt("milestones", c.milestones);
    opt("factors", c.factors);
    if (j.contains("train_protocol")) c.train_protocol = protocol_from_string(j["train_protocol"].get<std::string>());
    opt("coef_range", c.coef_range);
    opt("grid_size", c.grid_size);
    opt("length_scale", c.length_scale);
    opt("variance", c.variance);
    opt("softening", c.softening);
    opt("diffusivity", c.diffusivity);
    opt("velocity", c.velocity);
    opt("newton_tol", c.newton_tol);
    opt("regularization_radius", c.regularization_radius);
    opt("strength_lo", c.strength_lo);
    opt("strength_hi", c.strength_hi);
    opt("beta", c.beta);
    opt("seed_grid", c.seed_grid);
    opt("proposal_grid", c.proposal_grid);
    opt("t0", c.t0);
    opt("sigma_env", c.sigma_env);
    opt("bump_width", c.bump_width);
    opt("sinkhorn_eps", c.sinkhorn_eps);
    opt("sinkhorn_iters", c.sinkhorn_iters);
    opt("sinkhorn_tol", c.sinkhorn_tol);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("benchmark card: ") + e.what());
  }
  return c;
}

}  // namespace setonet
