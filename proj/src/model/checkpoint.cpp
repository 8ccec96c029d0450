#include "seqssl/model/checkpoint.hpp"

#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace seqssl {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'Q', 'C', 'K', '0', '0', '0', '1'};

bool head_included(const std::string& stage, const std::string& name) {
  const bool is_proj = name.rfind("proj.", 0) == 0;
  const bool is_pred = name.rfind("pred.", 0) == 0;
  const bool is_cls = name.rfind("classifier.", 0) == 0;
  if (stage == "pretrained") return !is_cls;
  if (stage == "finetuned") return !is_proj && !is_pred;
  throw ValidationError("checkpoint.stage: must be 'pretrained' or 'finetuned'");
}

json spec_to_json(const ModelSpec& spec) {
  json j;
  j["backbone_kind"] = to_string(spec.backbone);
  j["in_channels"] = spec.in_channels;
  j["embed_dim"] = spec.embed_dim();
  j["proj_dim"] = spec.proj_dim;
  j["pred_hidden_dim"] = spec.pred_hidden();
  j["n_classes"] = spec.n_classes;
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.backbone = backbone_kind_from_string(j.at("backbone_kind").get<std::string>());
  spec.in_channels = j.at("in_channels").get<int>();
  spec.proj_dim = j.at("proj_dim").get<int>();
  spec.pred_hidden_dim = j.at("pred_hidden_dim").get<int>();
  spec.n_classes = j.at("n_classes").get<int>();
  spec.validate();
  return spec;
}

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void Checkpoint::validate() const {
  std::set<std::string> names;
  for (const auto& a : arrays) {
    require(names.insert(a.name).second, "checkpoint: duplicate array '" + a.name + "'");
    size_t expect = 1;
    for (uint32_t d : a.shape) expect *= d;
    require(a.data.size() == expect, "checkpoint: shape mismatch for '" + a.name + "'");
    require(all_finite(a.data), "checkpoint: non-finite values in '" + a.name + "'");
  }
  const bool has_cls = names.count("classifier.weight") > 0;
  bool has_proj = false;
  for (const auto& n : names) {
    if (n.rfind("proj.", 0) == 0) {
      has_proj = true;
      break;
    }
  }
  if (meta.stage == "pretrained") {
    require(has_proj && !has_cls, "checkpoint: pretrained stage must carry projection arrays "
                                  "and no classifier arrays");
  } else if (meta.stage == "finetuned") {
    require(has_cls && !has_proj, "checkpoint: finetuned stage must carry classifier arrays "
                                  "and no projection arrays");
  } else {
    throw ValidationError("checkpoint.stage: must be 'pretrained' or 'finetuned'");
  }
}

void Checkpoint::save(const std::string& path) const {
  validate();
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "checkpoint: cannot open '" + path + "' for writing");
  out.write(kMagic, 8);
  write_u32(out, static_cast<uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    write_u32(out, static_cast<uint32_t>(a.name.size()));
    out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    write_u32(out, static_cast<uint32_t>(a.shape.size()));
    for (uint32_t d : a.shape) write_u32(out, d);
    out.write(reinterpret_cast<const char*>(a.data.data()),
              static_cast<std::streamsize>(a.data.size() * sizeof(float)));
  }
  require(out.good(), "checkpoint: short write to '" + path + "'");

  json meta_j;
  meta_j["model_spec"] = spec_to_json(meta.spec);
  meta_j["training_stage"] = meta.stage;
  meta_j["framework"] = meta.framework;
  meta_j["epochs"] = meta.epochs;
  meta_j["seed"] = meta.seed;
  meta_j["framework_version"] = meta.framework_version;
  std::ofstream mout(path + ".json", std::ios::binary);
  require(mout.good(), "checkpoint: cannot open '" + path + ".json' for writing");
  mout << meta_j.dump(2) << "\n";
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  require(in.gcount() == 8 && std::equal(magic, magic + 8, kMagic),
          "checkpoint: bad magic in '" + path + "'");
  Checkpoint ckpt;
  const uint32_t count = read_u32(in);
  for (uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const uint32_t name_len = read_u32(in);
    a.name.resize(name_len);
    in.read(a.name.data(), name_len);
    const uint32_t ndim = read_u32(in);
    a.shape.resize(ndim);
    size_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      a.shape[d] = read_u32(in);
      total *= a.shape[d];
    }
    a.data.resize(total);
    in.read(reinterpret_cast<char*>(a.data.data()),
            static_cast<std::streamsize>(total * sizeof(float)));
    require(in.good(), "checkpoint: truncated payload in '" + path + "'");
    ckpt.arrays.push_back(std::move(a));
  }

  std::ifstream min(path + ".json");
  require(min.good(), "checkpoint: missing metadata sidecar '" + path + ".json'");
  json meta_j = json::parse(min);
  ckpt.meta.spec = spec_from_json(meta_j.at("model_spec"));
  ckpt.meta.stage = meta_j.at("training_stage").get<std::string>();
  ckpt.meta.framework = meta_j.value("framework", "");
  ckpt.meta.epochs = meta_j.at("epochs").get<int>();
  ckpt.meta.seed = meta_j.at("seed").get<uint64_t>();
  ckpt.meta.framework_version = meta_j.at("framework_version").get<std::string>();
  ckpt.validate();
  return ckpt;
}

Checkpoint snapshot_model(const Model& model, const CheckpointMeta& meta) {
  Checkpoint ckpt;
  ckpt.meta = meta;
  ckpt.meta.spec = model.spec();
  if (ckpt.meta.framework_version.empty()) {
    ckpt.meta.framework_version = std::string("seqssl ") + kVersion;
  }
  const Registry& reg = model.registry();
  for (const auto& p : reg.params) {
    if (!head_included(meta.stage, p.name)) continue;
    ckpt.arrays.push_back({p.name, p.shape, *p.value});
  }
  for (const auto& s : reg.states) {
    if (!head_included(meta.stage, s.name)) continue;
    ckpt.arrays.push_back({s.name, s.shape, *s.value});
  }
  ckpt.validate();
  return ckpt;
}

std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt) {
  ckpt.validate();
  auto model = build_model(ckpt.meta.spec, ckpt.meta.seed);
  std::map<std::string, const NamedArray*> by_name;
  for (const auto& a : ckpt.arrays) by_name[a.name] = &a;

  size_t loaded = 0;
  Registry& reg = model->registry();
  auto load_into = [&](const std::string& name, std::vector<float>* dst,
                       const std::vector<uint32_t>& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      require(!head_included(ckpt.meta.stage, name),
              "checkpoint: missing array '" + name + "'");
      return;
    }
    require(it->second->shape == shape, "checkpoint: shape mismatch for '" + name + "'");
    *dst = it->second->data;
    ++loaded;
  };
  for (auto& p : reg.params) load_into(p.name, p.value, p.shape);
  for (auto& s : reg.states) load_into(s.name, s.value, s.shape);
  require(loaded == ckpt.arrays.size(), "checkpoint: unrecognized arrays present");
  return model;
}

}  // namespace seqssl
