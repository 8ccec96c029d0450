#include "seqssl/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

extern char** environ;

namespace seqssl {

using nlohmann::json;

namespace {

const std::set<std::string> kSections = {"run",      "phantom", "data",  "model", "augment",
                                         "pretrain", "finetune", "sweep", "embed"};

class Applier {
 public:
  explicit Applier(const toml::Document& doc) : doc_(doc) {}

  template <typename F>
  void with(const std::string& table, const std::string& key, F&& fn) const {
    auto t = doc_.find(table);
    if (t == doc_.end()) return;
    auto v = t->second.find(key);
    if (v == t->second.end()) return;
    try {
      fn(v->second);
    } catch (const ValidationError& e) {
      throw ValidationError(table + "." + key + ": " + e.what());
    }
  }

  void get(const std::string& t, const std::string& k, int& out) const {
    with(t, k, [&](const toml::Value& v) { out = static_cast<int>(v.as_int()); });
  }
  void get(const std::string& t, const std::string& k, uint64_t& out) const {
    with(t, k, [&](const toml::Value& v) { out = static_cast<uint64_t>(v.as_int()); });
  }
  void get(const std::string& t, const std::string& k, double& out) const {
    with(t, k, [&](const toml::Value& v) { out = v.as_number(); });
  }
  void get(const std::string& t, const std::string& k, bool& out) const {
    with(t, k, [&](const toml::Value& v) { out = v.as_bool(); });
  }
  void get(const std::string& t, const std::string& k, std::string& out) const {
    with(t, k, [&](const toml::Value& v) { out = v.as_string(); });
  }
  void get_numbers(const std::string& t, const std::string& k, std::vector<double>& out) const {
    with(t, k, [&](const toml::Value& v) {
      out.clear();
      for (const auto& item : v.as_array()) out.push_back(item.as_number());
    });
  }
  void get_ints(const std::string& t, const std::string& k, std::vector<int>& out) const {
    with(t, k, [&](const toml::Value& v) {
      out.clear();
      for (const auto& item : v.as_array()) out.push_back(static_cast<int>(item.as_int()));
    });
  }
  void get_strings(const std::string& t, const std::string& k,
                   std::vector<std::string>& out) const {
    with(t, k, [&](const toml::Value& v) {
      out.clear();
      for (const auto& item : v.as_array()) out.push_back(item.as_string());
    });
  }

 private:
  const toml::Document& doc_;
};

// SEQSSL_PRETRAIN_BATCH_SIZE=64 -> doc["pretrain"]["batch_size"]. Values are
// parsed as TOML scalars, falling back to plain strings (paths need no
// quoting in the environment).
void apply_env_overrides(toml::Document& doc) {
  for (char** env = environ; *env != nullptr; ++env) {
    const std::string entry(*env);
    if (entry.rfind("SEQSSL_", 0) != 0) continue;
    const size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(7, eq - 7);
    const std::string raw = entry.substr(eq + 1);

    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const size_t us = name.find('_');
    require(us != std::string::npos, "config: malformed override SEQSSL_" + name);
    const std::string section = name.substr(0, us);
    const std::string key = name.substr(us + 1);
    require(kSections.count(section) > 0,
            "config: unknown section in override SEQSSL_" + name);

    toml::Value value;
    try {
      value = toml::parse_scalar(raw);
    } catch (const ValidationError&) {
      value = toml::Value{raw};
    }
    doc[section][key] = value;
  }
}

void apply_document(const toml::Document& doc, ExperimentConfig& cfg) {
  for (const auto& [table, _] : doc) {
    require(kSections.count(table) > 0 || table.empty(),
            "config: unknown section [" + table + "]");
  }
  Applier a(doc);

  a.get("run", "out_dir", cfg.out_dir);
  a.get("run", "seed", cfg.seed);
  a.get("run", "jobs", cfg.jobs);

  a.get("phantom", "n_studies_per_class", cfg.phantom.n_studies_per_class);
  a.get("phantom", "noise_level", cfg.phantom.noise_level);
  std::vector<double> shape;
  a.get_numbers("phantom", "shape", shape);
  if (!shape.empty()) {
    require(shape.size() == 3, "phantom.shape: must be [D, H, W]");
    cfg.phantom.d = static_cast<int>(shape[0]);
    cfg.phantom.h = static_cast<int>(shape[1]);
    cfg.phantom.w = static_cast<int>(shape[2]);
  }

  a.get("data", "volumes_dir", cfg.volumes_dir);
  a.get("data", "dataset_dir", cfg.dataset_dir);
  a.get("data", "fraction", cfg.ingest.fraction);
  a.get("data", "size", cfg.ingest.target_size);
  std::vector<std::string> planes;
  a.get_strings("data", "planes", planes);
  if (!planes.empty()) {
    cfg.ingest.planes.clear();
    for (const auto& p : planes) cfg.ingest.planes.insert(plane_from_string(p));
  }

  a.with("model", "backbone", [&](const toml::Value& v) {
    cfg.model.backbone = backbone_kind_from_string(v.as_string());
  });
  a.get("model", "proj_dim", cfg.model.proj_dim);
  a.get("model", "pred_hidden_dim", cfg.model.pred_hidden_dim);

  a.get("augment", "p_flip_h", cfg.augment.p_flip_h);
  a.get("augment", "p_flip_v", cfg.augment.p_flip_v);
  std::vector<double> rot;
  a.get_numbers("augment", "rotation_deg", rot);
  if (!rot.empty()) {
    require(rot.size() == 2, "augment.rotation_deg: must be [lo, hi]");
    cfg.augment.rotation_lo_deg = rot[0];
    cfg.augment.rotation_hi_deg = rot[1];
  }
  a.get("augment", "elastic_alpha", cfg.augment.elastic_alpha);
  a.get("augment", "elastic_sigma", cfg.augment.elastic_sigma);

  a.with("pretrain", "framework", [&](const toml::Value& v) {
    cfg.pretrain.framework = framework_from_string(v.as_string());
  });
  a.get("pretrain", "epochs", cfg.pretrain.epochs);
  a.get("pretrain", "batch_size", cfg.pretrain.batch_size);
  a.get("pretrain", "resolution", cfg.pretrain.resolution);
  a.get("pretrain", "lr", cfg.pretrain.optim.lr);
  a.get("pretrain", "weight_decay", cfg.pretrain.optim.weight_decay);
  a.get("pretrain", "momentum", cfg.pretrain.optim.momentum);
  a.get("pretrain", "temperature", cfg.pretrain.temperature);

  a.get("finetune", "fraction", cfg.finetune.label_fraction);
  a.with("finetune", "init", [&](const toml::Value& v) {
    const std::string& s = v.as_string();
    if (s == "from_checkpoint") {
      cfg.finetune.from_checkpoint = true;
    } else if (s == "from_scratch") {
      cfg.finetune.from_checkpoint = false;
    } else {
      throw ValidationError("must be 'from_checkpoint' or 'from_scratch', got '" + s + "'");
    }
  });
  a.get("finetune", "epochs", cfg.finetune.epochs);
  a.get("finetune", "patience", cfg.finetune.patience);
  a.get("finetune", "head_warmup_epochs", cfg.finetune.head_warmup_epochs);
  a.get("finetune", "batch_size", cfg.finetune.batch_size);
  a.get("finetune", "resolution", cfg.finetune.resolution);
  a.get("finetune", "lr", cfg.finetune.optim.lr);
  a.get("finetune", "weight_decay", cfg.finetune.optim.weight_decay);
  a.get("finetune", "momentum", cfg.finetune.optim.momentum);
  a.get("finetune", "augment", cfg.finetune.augment_train);
  a.get("finetune", "checkpoint", cfg.finetune_checkpoint);

  a.with("sweep", "framework", [&](const toml::Value& v) {
    cfg.sweep.framework = framework_from_string(v.as_string());
  });
  a.get_numbers("sweep", "fractions", cfg.sweep.fractions);
  a.get_ints("sweep", "batch_sizes", cfg.sweep.batch_sizes);
  a.get_ints("sweep", "resolutions", cfg.sweep.resolutions);
  a.get("sweep", "base_resolution", cfg.sweep.base_resolution);
  a.get("sweep", "pretrain_epochs", cfg.sweep.pretrain_epochs);
  a.get("sweep", "finetune_epochs", cfg.sweep.finetune_epochs);

  a.with("embed", "method", [&](const toml::Value& v) {
    cfg.embed_method = projection_method_from_string(v.as_string());
  });
  a.get("embed", "checkpoint", cfg.embed_checkpoint);
  a.get("embed", "max_points", cfg.embed_max_points);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& config_path, bool apply_env) {
  toml::Document doc;
  if (!config_path.empty()) doc = toml::parse_file(config_path);
  if (apply_env) apply_env_overrides(doc);

  ExperimentConfig cfg;
  apply_document(doc, cfg);

  // shared fields flow into the nested configs
  cfg.phantom.seed = cfg.seed;
  cfg.ingest.seed = cfg.seed;
  cfg.pretrain.seed = cfg.seed;
  cfg.pretrain.augment = cfg.augment;
  cfg.finetune.seed = cfg.seed;
  cfg.finetune.augment = cfg.augment;
  cfg.sweep.seed = cfg.seed;
  cfg.sweep.model = cfg.model;
  cfg.sweep.augment = cfg.augment;
  cfg.sweep.optim = cfg.pretrain.optim;
  cfg.sweep.jobs = cfg.jobs;
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["run"] = {{"out_dir", out_dir}, {"seed", seed}, {"jobs", jobs}};
  j["phantom"] = {{"n_studies_per_class", phantom.n_studies_per_class},
                  {"shape", {phantom.d, phantom.h, phantom.w}},
                  {"noise_level", phantom.noise_level}};
  std::vector<std::string> plane_names;
  for (Plane p : ingest.planes) plane_names.push_back(to_string(p));
  j["data"] = {{"volumes_dir", volumes_dir},
               {"dataset_dir", dataset_dir},
               {"fraction", ingest.fraction},
               {"planes", plane_names},
               {"size", ingest.target_size}};
  j["model"] = {{"backbone", to_string(model.backbone)},
                {"proj_dim", model.proj_dim},
                {"pred_hidden_dim", model.pred_hidden()},
                {"embed_dim", model.embed_dim()},
                {"n_classes", model.n_classes}};
  j["augment"] = {{"p_flip_h", augment.p_flip_h},
                  {"p_flip_v", augment.p_flip_v},
                  {"rotation_deg", {augment.rotation_lo_deg, augment.rotation_hi_deg}},
                  {"elastic_alpha", augment.elastic_alpha},
                  {"elastic_sigma", augment.elastic_sigma}};
  j["pretrain"] = {{"framework", to_string(pretrain.framework)},
                   {"epochs", pretrain.epochs},
                   {"batch_size", pretrain.batch_size},
                   {"resolution", pretrain.resolution},
                   {"lr", pretrain.optim.lr},
                   {"weight_decay", pretrain.optim.weight_decay},
                   {"momentum", pretrain.optim.momentum},
                   {"temperature", pretrain.temperature}};
  j["finetune"] = {{"fraction", finetune.label_fraction},
                   {"init", finetune.from_checkpoint ? "from_checkpoint" : "from_scratch"},
                   {"epochs", finetune.epochs},
                   {"patience", finetune.patience},
                   {"head_warmup_epochs", finetune.head_warmup_epochs},
                   {"batch_size", finetune.batch_size},
                   {"resolution", finetune.resolution},
                   {"augment", finetune.augment_train},
                   {"checkpoint", finetune_checkpoint}};
  j["sweep"] = {{"framework", to_string(sweep.framework)},
                {"fractions", sweep.fractions},
                {"batch_sizes", sweep.batch_sizes},
                {"resolutions", sweep.resolutions},
                {"base_resolution", sweep.base_resolution},
                {"pretrain_epochs", sweep.pretrain_epochs},
                {"finetune_epochs", sweep.finetune_epochs}};
  j["embed"] = {{"method", to_string(embed_method)},
                {"checkpoint", embed_checkpoint},
                {"max_points", embed_max_points}};
  return j.dump(2);
}

}  // namespace seqssl
