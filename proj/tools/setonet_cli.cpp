// setonet: dataset generation, training, evaluation, sensor ablation,
// constructive UAT check and loss-history plots.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "setonet/datagen/elastic.hpp"
#include "setonet/datagen/generate.hpp"
#include "setonet/errors.hpp"
#include "setonet/plot.hpp"
#include "setonet/training.hpp"
#include "setonet/uat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace setonet;

namespace {

struct GenArgs {
  std::string benchmark;
  std::string out;
  std::string elastic_dir;
  int train = -1;
  int test = -1;
  int grid = 0;
  int m = 0;
  int nq = 0;
  std::uint64_t seed = 0;
  bool force = false;
};

struct TrainArgs {
  std::string benchmark = "derivative";
  std::string variant = "key";
  std::string protocol;
  std::string data;
  std::string out = "run";
  long long steps = 0;
  int batch = 0;
  double lr = 5e-4;
  double clip = 1.0;
  double drop_rate = 0.2;
  int eval_every = 1000;
  std::uint64_t eval_seed = 20240917;
  std::uint64_t layout_seed = 0;
  std::vector<std::uint64_t> seeds{0};
  std::vector<long long> milestones;
  std::vector<double> factors;
};

struct EvalArgs {
  std::string checkpoint;
  std::string protocol = "fixed";
  std::string data;
  double drop_rate = 0.2;
  bool variable_base = false;
  std::uint64_t eval_seed = 20240917;
};

struct AblateArgs {
  std::string checkpoint;
  std::string data;
  std::vector<int> counts;
  std::string csv = "ablation.csv";
  std::string svg;
  std::uint64_t eval_seed = 20240917;
};

struct UatArgs {
  UatConfig cfg;
  std::string mix = "tanh";
};

struct PlotArgs {
  std::vector<std::string> runs;
  std::string out = "loss_history.svg";
  std::string title = "Test MSE";
};

BenchmarkCard card_for(const std::string& name) {
  BenchmarkCard c = benchmark_card(name);
  c.validate();
  return c;
}

void print_checksums(const OperatorDataset& ds) {
  for (const auto& [name, crc] : dataset_checksums(ds))
    std::cout << ds.split << "/" << name << " crc32=" << std::hex << std::setw(8) << std::setfill('0') << crc
              << std::dec << std::setfill(' ') << "\n";
}

int cmd_gen(const GenArgs& a) {
  BenchmarkCard card = card_for(a.benchmark);
  if (a.grid > 0) card.grid_size = a.grid;
  if (a.m > 0) card.m = a.m;
  if (a.nq > 0) card.nq = a.nq;
  if (card.kind == BenchmarkKind::diffraction && a.grid > 0 && a.nq == 0) card.nq = a.grid * a.grid;
  card.validate();
  if (fs::exists(dataset_sidecar_path(a.out, "train")) && !a.force)
    throw ValidationError("output '" + a.out + "' already holds a dataset; pass --force to overwrite");

  if (card.kind == BenchmarkKind::elastic) {
    if (a.elastic_dir.empty()) throw ValidationError("elastic: --elastic-dir with the NPY files is required");
    ElasticData d = load_elastic_dataset(a.elastic_dir);
    write_dataset(a.out, d.train);
    write_dataset(a.out, d.test);
    print_checksums(d.train);
    print_checksums(d.test);
    return 0;
  }
  const int n_train = a.train >= 0 ? a.train : card.train_size;
  const int n_test = a.test >= 0 ? a.test : card.test_size;
  std::cout << "benchmark " << card.name << ": train " << n_train << ", test " << n_test << ", seed " << a.seed
            << "\n";
  for (auto [split, n] : {std::pair<std::string, int>{"train", n_train}, {"test", n_test}}) {
    if (n <= 0) throw ValidationError("split '" + split + "' needs a positive size (use --train/--test)");
    auto progress = [&, split = split](Eigen::Index done, Eigen::Index total) {
      if (done % 1000 == 0 || done == total) std::cerr << "  " << split << " " << done << "/" << total << "\r";
    };
    OperatorDataset ds = generate_dataset(card, split, n, a.seed, progress);
    std::cerr << "\n";
    write_dataset(a.out, ds);
    print_checksums(ds);
  }
  return 0;
}

TrainConfig build_train_config(const TrainArgs& a) {
  BenchmarkCard card = card_for(a.benchmark);
  TrainConfig cfg = default_train_config(card, branch_variant_from_string(a.variant));
  if (!a.protocol.empty()) cfg.protocol.mode = protocol_from_string(a.protocol);
  cfg.protocol.drop_rate = a.drop_rate;
  if (a.steps > 0) {
    // Milestones follow the step budget unless given explicitly.
    const double r = static_cast<double>(a.steps) / static_cast<double>(card.steps);
    if (a.milestones.empty()) {
      long long prev = 0;
      for (auto& m : cfg.schedule.milestones) {
        m = std::max<long long>(prev + 1, static_cast<long long>(m * r));
        prev = m;
      }
    }
    cfg.steps = a.steps;
  }
  if (!a.milestones.empty()) cfg.schedule.milestones = a.milestones;
  if (!a.factors.empty()) cfg.schedule.factors = a.factors;
  if (a.batch > 0) cfg.batch_size = a.batch;
  cfg.schedule.base_lr = a.lr;
  cfg.clip = a.clip;
  cfg.eval_every = a.eval_every;
  cfg.eval_seed = a.eval_seed;
  return cfg;
}

json run_meta(const TrainConfig& cfg, const TrainArgs& a, std::uint64_t seed) {
  return {{"benchmark", json::parse(card_to_json(cfg.card))},
          {"data", a.data.empty() ? "" : fs::absolute(a.data).string()},
          {"layout_seed", a.layout_seed},
          {"seed", seed},
          {"steps", cfg.steps},
          {"batch_size", cfg.batch_size},
          {"protocol", to_string(cfg.protocol.mode)},
          {"drop_rate", cfg.protocol.drop_rate},
          {"lr", cfg.schedule.base_lr},
          {"milestones", cfg.schedule.milestones},
          {"factors", cfg.schedule.factors},
          {"clip", cfg.clip},
          {"adam", {{"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"eps", cfg.adam.eps}}},
          {"eval_every", cfg.eval_every},
          {"eval_seed", cfg.eval_seed}};
}

int cmd_train(const TrainArgs& a) {
  TrainConfig cfg = build_train_config(a);
  cfg.validate();
  auto source = open_source(cfg.card, a.data, a.layout_seed);
  if (source->card().kind != cfg.card.kind) throw ValidationError("dataset does not match the benchmark");

  std::cout << "card " << card_to_json(cfg.card) << "\n";
  std::cout << "model " << model_config_to_json(cfg.model) << "\n";
  fs::create_directories(a.out);

  std::vector<std::vector<MetricsRecord>> runs;
  for (std::uint64_t seed : a.seeds) {
    TrainConfig c = cfg;
    c.seed = seed;
    const fs::path dir = fs::path(a.out) / ("seed" + std::to_string(seed));
    fs::create_directories(dir);
    c.metrics_path = (dir / "metrics.jsonl").string();
    fs::remove(c.metrics_path);
    const json meta = run_meta(c, a, seed);
    std::cout << "run " << meta.dump() << "\n";
    {
      Model probe(c.model, seed);
      std::cout << "parameters " << probe.param_count() << "\n";
    }
    TrainResult r = train(c, *source, [](const MetricsRecord& m) {
      std::cout << "step " << m.step << " mse " << m.test_mse << " rel_l2 " << m.test_rel_l2 << " train_loss "
                << m.train_loss << " lr " << m.lr << " t " << m.wall_seconds << "s" << std::endl;
    });
    save_checkpoint((dir / "model.bin").string(), *r.model, meta.dump());
    runs.push_back(r.history);
  }

  const auto rows = aggregate_seeds(runs);
  std::ofstream tab(fs::path(a.out) / "summary.tsv");
  tab << "step\tseeds\tmse_mean\tmse_std\trel_l2_mean\trel_l2_std\n";
  for (const auto& row : rows)
    tab << row.step << "\t" << row.seeds << "\t" << row.mse_mean << "\t" << row.mse_std << "\t" << row.rel_mean << "\t"
        << row.rel_std << "\n";
  const auto& last = rows.back();
  std::cout << "summary " << a.benchmark << " " << a.variant << " " << to_string(cfg.protocol.mode)
            << " rel_l2 " << last.rel_mean << " +- " << last.rel_std << " mse " << last.mse_mean << " +- "
            << last.mse_std << " (" << last.seeds << " seeds)\n";
  return 0;
}

struct LoadedRun {
  std::unique_ptr<Model> model;
  json meta;
  std::unique_ptr<DataSource> source;
};

LoadedRun load_run(const std::string& checkpoint, const std::string& data_override) {
  LoadedRun r;
  std::string meta;
  r.model = load_checkpoint(checkpoint, &meta);
  r.meta = json::parse(meta);
  if (!r.meta.contains("benchmark")) throw DatasetError(DatasetError::Kind::missing_key, "checkpoint lacks 'benchmark'");
  const BenchmarkCard card = card_from_json(r.meta["benchmark"].dump());
  const std::string data = data_override.empty() ? r.meta.value("data", std::string()) : data_override;
  r.source = open_source(card, data, r.meta.value("layout_seed", std::uint64_t{0}));
  return r;
}

int cmd_eval(const EvalArgs& a) {
  LoadedRun run = load_run(a.checkpoint, a.data);
  ProtocolSpec p;
  p.mode = protocol_from_string(a.protocol);
  p.drop_rate = a.drop_rate;
  p.variable_base = a.variable_base;
  const Metrics m = evaluate(*run.model, *run.source, p, a.eval_seed);
  std::cout << std::setprecision(10) << "protocol " << to_string(p.mode) << " drop_rate " << p.drop_rate << " mse "
            << m.mse << " rel_l2 " << m.rel_l2 << "\n";
  return 0;
}

int cmd_ablate(const AblateArgs& a) {
  LoadedRun run = load_run(a.checkpoint, a.data);
  std::vector<int> counts = a.counts.empty() ? std::vector<int>{run.source->m()} : a.counts;
  const auto rows = sensor_count_ablation(*run.model, *run.source, counts, ProtocolSpec{}, a.eval_seed);
  std::ofstream csv(a.csv);
  if (!csv) throw IoError("cannot write '" + a.csv + "'");
  csv << "count,mse,rel_l2\n";
  csv << std::setprecision(10);
  std::cout << std::setprecision(10);
  for (const auto& r : rows) {
    csv << r.count << "," << r.mse << "," << r.rel_l2 << "\n";
    std::cout << "M " << r.count << " mse " << r.mse << " rel_l2 " << r.rel_l2 << "\n";
  }
  if (!a.svg.empty()) {
    Series s;
    s.label = "test MSE";
    for (const auto& r : rows) {
      s.x.push_back(r.count);
      s.y.push_back(std::log10(r.mse));
    }
    write_svg(a.svg, {"Sensor-count ablation", "M", "log10 test MSE"}, {s});
  }
  return 0;
}

int cmd_verify(UatArgs a) {
  a.cfg.mix = activation_from_string(a.mix);
  const UatReport r = verify_uat(a.cfg);
  std::cout << report_to_text(r);
  if (!r.pass) throw NumericalError("constructive equivalence exceeded the tolerance");
  return 0;
}

int cmd_plot(const PlotArgs& a) {
  std::vector<Series> series;
  for (const auto& run : a.runs) {
    std::vector<std::vector<MetricsRecord>> seeds;
    for (const auto& e : fs::directory_iterator(run))
      if (e.is_directory() && fs::exists(e.path() / "metrics.jsonl"))
        seeds.push_back(read_metrics_log((e.path() / "metrics.jsonl").string()));
    if (seeds.empty()) throw IoError("no seed*/metrics.jsonl under '" + run + "'");
    series.push_back(loss_history_series(fs::path(run).filename().string(), seeds));
  }
  write_svg(a.out, {a.title, "step", "log10 test MSE"}, series);
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SetONet operator learning toolkit"};
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags override it");
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a benchmark dataset");
  g->add_option("--benchmark", gen.benchmark, "Benchmark name")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--train", gen.train, "Training samples (default from the card)");
  g->add_option("--test", gen.test, "Test samples (default from the card)");
  g->add_option("--grid", gen.grid, "Override the generator grid size");
  g->add_option("--m", gen.m, "Override the sensor count");
  g->add_option("--nq", gen.nq, "Override the query count");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--elastic-dir", gen.elastic_dir, "Directory with the elastic-plate NPY files");
  g->add_flag("--force", gen.force, "Overwrite an existing dataset");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one model per seed");
  t->add_option("--benchmark", tr.benchmark, "Benchmark name");
  t->add_option("--variant", tr.variant, "key, attention, mean, sum, deeponet or vidon");
  t->add_option("--protocol", tr.protocol, "fixed, variable or dropoff (default from the card)");
  t->add_option("--data", tr.data, "Dataset directory (optional for derivative/integral)");
  t->add_option("--out", tr.out, "Run directory");
  t->add_option("--steps", tr.steps, "Optimization steps (default from the card)");
  t->add_option("--batch", tr.batch, "Batch size (default from the card)");
  t->add_option("--lr", tr.lr, "Base learning rate");
  t->add_option("--clip", tr.clip, "Global gradient-norm clip (0 disables)");
  t->add_option("--drop-rate", tr.drop_rate, "Drop rate for variable/dropoff protocols");
  t->add_option("--eval-every", tr.eval_every, "Steps between test evaluations");
  t->add_option("--eval-seed", tr.eval_seed, "Seed of the evaluation layouts and masks");
  t->add_option("--layout-seed", tr.layout_seed, "Seed of the fixed layout and on-the-fly test set");
  t->add_option("--seeds", tr.seeds, "Training seeds")->delimiter(',');
  t->add_option("--milestones", tr.milestones, "LR milestones (default scaled from the card)")->delimiter(',');
  t->add_option("--factors", tr.factors, "LR factors")->delimiter(',');

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--protocol", ev.protocol, "fixed, variable or dropoff");
  e->add_option("--data", ev.data, "Dataset directory (default: the one used in training)");
  e->add_option("--drop-rate", ev.drop_rate, "Drop rate");
  e->add_flag("--variable-base", ev.variable_base, "Apply drop-off on a resampled layout");
  e->add_option("--eval-seed", ev.eval_seed, "Evaluation seed");

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate-sensors", "Evaluate a checkpoint at several sensor counts");
  a->add_option("--checkpoint", ab.checkpoint, "Checkpoint file")->required();
  a->add_option("--data", ab.data, "Dataset directory");
  a->add_option("--counts", ab.counts, "Sensor counts")->delimiter(',');
  a->add_option("--csv", ab.csv, "Output table");
  a->add_option("--svg", ab.svg, "Output plot");
  a->add_option("--eval-seed", ab.eval_seed, "Evaluation seed");

  UatArgs ua;
  auto* u = app.add_subcommand("verify-uat", "Check the explicit SetONet-Key construction");
  u->add_option("--m", ua.cfg.m, "Sensors");
  u->add_option("--n", ua.cfg.n, "Hidden units per coefficient");
  u->add_option("--p", ua.cfg.p, "Coefficients");
  u->add_option("--dout", ua.cfg.dout, "Output channels");
  u->add_option("--tests", ua.cfg.tests, "Random inputs");
  u->add_option("--magnitude", ua.cfg.magnitude, "Perturbation magnitude");
  u->add_option("--tolerance", ua.cfg.tolerance, "Pass threshold on the sup discrepancy");
  u->add_option("--seed", ua.cfg.seed, "Seed");
  u->add_option("--mix", ua.mix, "Mixing function (tanh)");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Loss-history plot over seeds");
  p->add_option("--run", pl.runs, "Run directory with seed*/metrics.jsonl (repeatable)")->required();
  p->add_option("--out", pl.out, "Output SVG");
  p->add_option("--title", pl.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return static_cast<int>(ExitCode::validation);
  }

  try {
    if (*g) return cmd_gen(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*a) return cmd_ablate(ab);
    if (*u) return cmd_verify(ua);
    if (*p) return cmd_plot(pl);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ex.code());
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return static_cast<int>(ExitCode::io);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
