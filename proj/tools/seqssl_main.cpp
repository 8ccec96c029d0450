// seqssl — phantom generation, ingestion, contrastive pre-training,
// label-fraction fine-tuning, sweep grids, evaluation and embedding plots,
// driven by one TOML config with env/flag overrides.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "seqssl/cli/config.hpp"
#include "seqssl/report/plot.hpp"
#include "seqssl/report/project2d.hpp"
#include "seqssl/report/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace seqssl;

namespace {

bool g_log_json = false;

void log_info(const std::string& msg, const json& fields = json::object()) {
  if (g_log_json) {
    json j = fields;
    j["level"] = "info";
    j["msg"] = msg;
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "[info] " << msg;
    for (const auto& [k, v] : fields.items()) std::cerr << " " << k << "=" << v.dump();
    std::cerr << "\n";
  }
}

void write_run_metadata(const ExperimentConfig& cfg, const std::string& command,
                        double wall_seconds) {
  json j;
  j["command"] = command;
  j["config"] = json::parse(cfg.to_json());
  j["seed"] = cfg.seed;
  j["versions"] = {{"seqssl", kVersion}, {"compiler", __VERSION__}};
  j["wall_time_s"] = wall_seconds;
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / ("run_meta_" + command + ".json"),
                    std::ios::binary);
  out << j.dump(2) << "\n";
}

struct DatasetBundle {
  SplitManifest manifest;
  std::vector<LabeledSlice> train, val, test;
};

DatasetBundle load_dataset(const std::string& dataset_dir) {
  require(!dataset_dir.empty(), "data.dataset_dir: required for this command");
  DatasetBundle ds;
  ds.manifest = read_manifest((fs::path(dataset_dir) / "manifest.jsonl").string());
  ds.train = load_split(ds.manifest, Split::kTrain, dataset_dir);
  ds.val = load_split(ds.manifest, Split::kVal, dataset_dir);
  ds.test = load_split(ds.manifest, Split::kTest, dataset_dir);
  log_info("dataset loaded", {{"train", ds.train.size()},
                              {"val", ds.val.size()},
                              {"test", ds.test.size()}});
  return ds;
}

int cmd_phantom(const ExperimentConfig& cfg) {
  const auto volumes = generate_phantom_dataset(cfg.phantom);
  const std::string dir = (fs::path(cfg.out_dir) / "volumes").string();
  write_volume_dataset(volumes, dir);
  log_info("phantom volumes written", {{"dir", dir}, {"count", volumes.size()}});
  return 0;
}

int cmd_ingest(const ExperimentConfig& cfg) {
  require(!cfg.volumes_dir.empty(), "data.volumes_dir: required for ingest");
  const std::string out_dir =
      cfg.dataset_dir.empty() ? (fs::path(cfg.out_dir) / "dataset").string() : cfg.dataset_dir;
  const SplitManifest manifest = ingest_volumes(cfg.volumes_dir, out_dir, cfg.ingest);
  log_info("ingest complete", {{"dataset_dir", out_dir},
                               {"records", manifest.entries.size()},
                               {"train", manifest.count(Split::kTrain)},
                               {"val", manifest.count(Split::kVal)},
                               {"test", manifest.count(Split::kTest)}});
  return 0;
}

int cmd_pretrain(const ExperimentConfig& cfg) {
  const DatasetBundle ds = load_dataset(cfg.dataset_dir);
  PretrainResult result =
      pretrain(cfg.pretrain, strip_labels(ds.train), strip_labels(ds.val), cfg.model);
  fs::create_directories(cfg.out_dir);
  const std::string ckpt_path = (fs::path(cfg.out_dir) / "pretrained.ckpt").string();
  result.checkpoint.save(ckpt_path);
  write_loss_log(result.log, (fs::path(cfg.out_dir) / "pretrain_loss.csv").string());
  log_info("pretraining done", {{"checkpoint", ckpt_path},
                                {"epochs", result.log.size()},
                                {"final_loss", result.log.back().mean_loss}});
  return 0;
}

int cmd_finetune(const ExperimentConfig& cfg) {
  const DatasetBundle ds = load_dataset(cfg.dataset_dir);
  std::optional<Checkpoint> init;
  if (cfg.finetune.from_checkpoint) {
    require(!cfg.finetune_checkpoint.empty(),
            "finetune.checkpoint: required when init = from_checkpoint");
    init = Checkpoint::load(cfg.finetune_checkpoint);
  }
  FinetuneResult result = finetune(init, cfg.finetune, ds.train, ds.val, ds.test, cfg.model);
  fs::create_directories(cfg.out_dir);
  const std::string ckpt_path = (fs::path(cfg.out_dir) / "finetuned.ckpt").string();
  result.checkpoint.save(ckpt_path);
  write_loss_log(result.log, (fs::path(cfg.out_dir) / "finetune_loss.csv").string());
  const EvalResult eval = evaluate(result.checkpoint, ds.test, cfg.finetune.resolution);
  std::ofstream out(fs::path(cfg.out_dir) / "eval.json", std::ios::binary);
  out << eval.to_json() << "\n";
  log_info("fine-tuning done", {{"checkpoint", ckpt_path},
                                {"best_epoch", result.best_epoch},
                                {"test_accuracy", result.test_accuracy}});
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const DatasetBundle ds = load_dataset(cfg.dataset_dir);
  const std::string sweep_dir = (fs::path(cfg.out_dir) / "sweep").string();
  const RunGrid grid = run_sweep(cfg.sweep, ds.train, ds.val, ds.test, sweep_dir);
  emit_table(grid, TableFormat::kCsv, (fs::path(cfg.out_dir) / "table.csv").string());
  emit_table(grid, TableFormat::kMarkdown, (fs::path(cfg.out_dir) / "table.md").string());
  size_t failed = 0;
  for (const auto& [_, cell] : grid.cells) failed += cell.status == "failed" ? 1 : 0;
  log_info("sweep done", {{"cells", grid.cells.size()},
                          {"failed", failed},
                          {"table", (fs::path(cfg.out_dir) / "table.csv").string()}});
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg) {
  const DatasetBundle ds = load_dataset(cfg.dataset_dir);
  require(!cfg.finetune_checkpoint.empty(), "finetune.checkpoint: required for eval");
  const Checkpoint ckpt = Checkpoint::load(cfg.finetune_checkpoint);
  const EvalResult eval = evaluate(ckpt, ds.test, cfg.finetune.resolution);
  // slice-level metrics are primary; the study vote is a labeled extra
  const double study_acc = study_majority_accuracy(ckpt, ds.test, cfg.finetune.resolution);
  json j = json::parse(eval.to_json());
  j["study_majority_accuracy"] = study_acc;
  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "eval.json", std::ios::binary);
  out << j.dump(2) << "\n";
  log_info("evaluation done", {{"accuracy", eval.accuracy},
                               {"study_majority_accuracy", study_acc},
                               {"n", eval.n_samples}});
  return 0;
}

int cmd_embed(const ExperimentConfig& cfg) {
  const DatasetBundle ds = load_dataset(cfg.dataset_dir);
  require(!cfg.embed_checkpoint.empty(), "embed.checkpoint: required for embed");
  const Checkpoint ckpt = Checkpoint::load(cfg.embed_checkpoint);

  std::vector<LabeledSlice> subset = ds.test;
  if (static_cast<int>(subset.size()) > cfg.embed_max_points) {
    subset.resize(cfg.embed_max_points);
  }
  EmbeddingSet set = extract_embeddings(ckpt, subset, cfg.finetune.resolution);
  const double sil = silhouette_score(set.vectors, set.labels);
  set = project_2d(set, cfg.embed_method, cfg.seed);
  fs::create_directories(cfg.out_dir);
  const std::string base = (fs::path(cfg.out_dir) / "embeddings").string();
  render_plot(set, base);
  log_info("embedding plot written", {{"base", base},
                                      {"method", to_string(cfg.embed_method)},
                                      {"silhouette", sil},
                                      {"points", set.labels.size()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MRI-sequence self-supervised classification pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override, in_override, checkpoint_override;
  ExperimentConfig cfg;

  // flag targets; applied after the config file + env so flags win
  struct Overrides {
    std::optional<int> epochs, batch_size, resolution, size, jobs;
    std::optional<uint64_t> seed;
    std::optional<double> fraction;
    std::optional<std::string> framework, init, planes, method;
  } ovr;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML config file");
    sub->add_option("--out", out_override, "output directory");
    sub->add_option("--seed", ovr.seed, "global seed");
    sub->add_flag("--log-json", g_log_json, "JSON Lines logs on stderr");
    sub->add_option("--jobs", ovr.jobs, "parallel sweep columns");
  };

  CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic phantom cohort");
  add_common(phantom);
  CLI::App* ingest = app.add_subcommand("ingest", "volumes -> slices + split manifest");
  add_common(ingest);
  ingest->add_option("--in", in_override, "volume container directory");
  ingest->add_option("--fraction", ovr.fraction, "central slice fraction");
  ingest->add_option("--planes", ovr.planes, "comma list: sag,cor,ax");
  ingest->add_option("--size", ovr.size, "target resolution");
  CLI::App* pretrain_cmd = app.add_subcommand("pretrain", "contrastive pre-training");
  add_common(pretrain_cmd);
  pretrain_cmd->add_option("--epochs", ovr.epochs, "pre-training epochs");
  pretrain_cmd->add_option("--batch-size", ovr.batch_size, "pairs per step");
  pretrain_cmd->add_option("--framework", ovr.framework, "simclr | simsiam");
  pretrain_cmd->add_option("--resolution", ovr.resolution, "input resolution");
  CLI::App* finetune_cmd = app.add_subcommand("finetune", "supervised fine-tuning");
  add_common(finetune_cmd);
  finetune_cmd->add_option("--epochs", ovr.epochs, "fine-tuning epochs");
  finetune_cmd->add_option("--fraction", ovr.fraction, "label fraction in (0, 1]");
  finetune_cmd->add_option("--init", ovr.init, "from_checkpoint | from_scratch");
  finetune_cmd->add_option("--checkpoint", checkpoint_override, "pretrained checkpoint");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "batch/resolution x fraction grid");
  add_common(sweep_cmd);
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a finetuned checkpoint");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint_override, "finetuned checkpoint");
  CLI::App* embed_cmd = app.add_subcommand("embed", "latent-space plots");
  add_common(embed_cmd);
  embed_cmd->add_option("--checkpoint", checkpoint_override, "checkpoint to embed with");
  embed_cmd->add_option("--method", ovr.method, "pca | tsne");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::string command;
  try {
    cfg = ExperimentConfig::load(config_path);

    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!in_override.empty()) cfg.volumes_dir = in_override;
    if (!checkpoint_override.empty()) {
      cfg.finetune_checkpoint = checkpoint_override;
      cfg.embed_checkpoint = checkpoint_override;
    }
    if (ovr.seed) {
      cfg.seed = *ovr.seed;
      cfg.phantom.seed = *ovr.seed;
      cfg.ingest.seed = *ovr.seed;
      cfg.pretrain.seed = *ovr.seed;
      cfg.finetune.seed = *ovr.seed;
      cfg.sweep.seed = *ovr.seed;
    }
    if (ovr.jobs) cfg.sweep.jobs = cfg.jobs = *ovr.jobs;
    if (ovr.fraction) {
      cfg.ingest.fraction = *ovr.fraction;
      cfg.finetune.label_fraction = *ovr.fraction;
    }
    if (ovr.size) cfg.ingest.target_size = *ovr.size;
    if (ovr.planes) {
      cfg.ingest.planes.clear();
      std::stringstream ss(*ovr.planes);
      std::string tok;
      while (std::getline(ss, tok, ',')) cfg.ingest.planes.insert(plane_from_string(tok));
    }
    if (ovr.epochs) {
      cfg.pretrain.epochs = *ovr.epochs;
      cfg.finetune.epochs = *ovr.epochs;
    }
    if (ovr.batch_size) cfg.pretrain.batch_size = *ovr.batch_size;
    if (ovr.resolution) cfg.pretrain.resolution = *ovr.resolution;
    if (ovr.framework) cfg.pretrain.framework = framework_from_string(*ovr.framework);
    if (ovr.init) {
      require(*ovr.init == "from_checkpoint" || *ovr.init == "from_scratch",
              "finetune.init: must be 'from_checkpoint' or 'from_scratch'");
      cfg.finetune.from_checkpoint = *ovr.init == "from_checkpoint";
    }
    if (ovr.method) cfg.embed_method = projection_method_from_string(*ovr.method);

    int rc = 0;
    if (phantom->parsed()) {
      command = "phantom";
      rc = cmd_phantom(cfg);
    } else if (ingest->parsed()) {
      command = "ingest";
      rc = cmd_ingest(cfg);
    } else if (pretrain_cmd->parsed()) {
      command = "pretrain";
      cfg.pretrain.validate();
      rc = cmd_pretrain(cfg);
    } else if (finetune_cmd->parsed()) {
      command = "finetune";
      cfg.finetune.validate();
      rc = cmd_finetune(cfg);
    } else if (sweep_cmd->parsed()) {
      command = "sweep";
      rc = cmd_sweep(cfg);
    } else if (eval_cmd->parsed()) {
      command = "eval";
      rc = cmd_eval(cfg);
    } else if (embed_cmd->parsed()) {
      command = "embed";
      rc = cmd_embed(cfg);
    }
    const double wall = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - t0).count();
    write_run_metadata(cfg, command, wall);
    return rc;
  } catch (const ValidationError& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 1;
  }
}
