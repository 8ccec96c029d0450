#include "seqssl/data/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "seqssl/data/slices.hpp"

namespace seqssl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_raw_f32(const std::string& path, const std::vector<float>& data) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  require(out.good(), "short write to '" + path + "'");
}

std::vector<float> read_raw_f32(const std::string& path, size_t count) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '" + path + "'");
  std::vector<float> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  require(static_cast<size_t>(in.gcount()) == count * sizeof(float),
          "short read from '" + path + "'");
  return data;
}

constexpr char kSliceMagic[8] = {'S', 'Q', 'S', 'L', '0', '0', '0', '1'};

bool has_zero_variance(const Image& img) {
  if (img.v.empty()) return true;
  const float first = img.v[0];
  for (float v : img.v)
    if (v != first) return false;
  return true;
}

}  // namespace

void write_volume(const Volume& volume, const std::string& dir, const std::string& stem) {
  volume.validate();
  fs::create_directories(dir);
  json header;
  header["patient_id"] = volume.patient_id;
  header["study_id"] = volume.study_id;
  header["sequence_label"] = to_string(volume.label);
  header["shape"] = {volume.d, volume.h, volume.w};
  const std::string json_path = (fs::path(dir) / (stem + ".json")).string();
  std::ofstream out(json_path, std::ios::binary);
  require(out.good(), "cannot open '" + json_path + "' for writing");
  out << header.dump(2) << "\n";
  write_raw_f32((fs::path(dir) / (stem + ".raw")).string(), volume.voxels);
}

Volume read_volume(const std::string& json_path) {
  std::ifstream in(json_path);
  require(in.good(), "cannot open '" + json_path + "'");
  json header = json::parse(in);
  Volume vol;
  vol.patient_id = header.at("patient_id").get<std::string>();
  vol.study_id = header.at("study_id").get<std::string>();
  vol.label = sequence_label_from_string(header.at("sequence_label").get<std::string>());
  auto shape = header.at("shape").get<std::vector<int>>();
  require(shape.size() == 3, "volume header: shape must be [D,H,W]");
  vol.d = shape[0];
  vol.h = shape[1];
  vol.w = shape[2];
  require(vol.d >= 1 && vol.h >= 1 && vol.w >= 1, "volume header: dims must be >= 1");
  fs::path raw_path = fs::path(json_path);
  raw_path.replace_extension(".raw");
  vol.voxels = read_raw_f32(raw_path.string(), static_cast<size_t>(vol.d) * vol.h * vol.w);
  vol.validate();
  return vol;
}

void write_volume_dataset(const std::vector<Volume>& volumes, const std::string& dir) {
  for (const auto& v : volumes) {
    write_volume(v, dir, v.patient_id + "_" + v.study_id + "_" + to_string(v.label));
  }
}

std::vector<Volume> read_volume_dataset(const std::string& dir) {
  require(fs::is_directory(dir), "volume dataset: '" + dir + "' is not a directory");
  std::vector<std::string> headers;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") headers.push_back(entry.path().string());
  }
  std::sort(headers.begin(), headers.end());
  require(!headers.empty(), "volume dataset: no volume headers in '" + dir + "'");
  std::vector<Volume> volumes;
  volumes.reserve(headers.size());
  for (const auto& h : headers) volumes.push_back(read_volume(h));
  return volumes;
}

void write_slice_pixels(const Image& pixels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open '" + path + "' for writing");
  out.write(kSliceMagic, sizeof(kSliceMagic));
  const uint32_t h = static_cast<uint32_t>(pixels.h);
  const uint32_t w = static_cast<uint32_t>(pixels.w);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(pixels.v.data()),
            static_cast<std::streamsize>(pixels.v.size() * sizeof(float)));
  require(out.good(), "short write to '" + path + "'");
}

Image read_slice_pixels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  require(in.gcount() == 8 && std::equal(magic, magic + 8, kSliceMagic),
          "slice file: bad magic in '" + path + "'");
  uint32_t h = 0, w = 0;
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  require(h >= 1 && w >= 1, "slice file: bad dims in '" + path + "'");
  Image img(static_cast<int>(h), static_cast<int>(w));
  in.read(reinterpret_cast<char*>(img.v.data()),
          static_cast<std::streamsize>(img.v.size() * sizeof(float)));
  require(static_cast<size_t>(in.gcount()) == img.v.size() * sizeof(float),
          "slice file: short read from '" + path + "'");
  return img;
}

std::string record_locator(const SliceRecord& record) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%s_%04d", to_string(record.plane), record.slice_index);
  return record.patient_id + "_" + record.study_id + buf;
}

std::vector<SliceRecord> slices_from_volumes(const std::vector<Volume>& volumes,
                                             double fraction, const std::set<Plane>& planes,
                                             int target_size, bool drop_empty) {
  std::vector<SliceRecord> out;
  for (const auto& vol : volumes) {
    for (auto& rec : extract_central_slices(vol, fraction, planes)) {
      rec.pixels = normalize_intensity(resample_slice(rec.pixels, target_size, target_size));
      if (drop_empty && has_zero_variance(rec.pixels)) continue;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

SplitManifest ingest_volumes(const std::string& volumes_dir, const std::string& out_dir,
                             const IngestOptions& options) {
  require(options.target_size >= 1, "ingest.size: must be >= 1");
  const auto volumes = read_volume_dataset(volumes_dir);
  auto records = slices_from_volumes(volumes, options.fraction, options.planes,
                                     options.target_size, options.drop_empty);
  require(!records.empty(), "ingest: no usable slices found");

  const fs::path slices_dir = fs::path(out_dir) / "slices";
  fs::create_directories(slices_dir);
  std::vector<std::string> locators;
  locators.reserve(records.size());
  for (const auto& rec : records) {
    const std::string rel = "slices/" + record_locator(rec) + ".slice";
    write_slice_pixels(rec.pixels, (fs::path(out_dir) / rel).string());
    locators.push_back(rel);
  }

  auto manifest = split_by_patient(records, options.split_ratios, options.seed, locators);
  write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());

  json ds;
  ds["height"] = options.target_size;
  ds["width"] = options.target_size;
  ds["fraction"] = options.fraction;
  std::vector<std::string> plane_names;
  for (Plane p : options.planes) plane_names.push_back(to_string(p));
  ds["planes"] = plane_names;
  ds["count"] = records.size();
  ds["source"] = volumes_dir;
  std::ofstream dout((fs::path(out_dir) / "dataset.json").string(), std::ios::binary);
  require(dout.good(), "ingest: cannot write dataset.json");
  dout << ds.dump(2) << "\n";
  return manifest;
}

std::vector<LabeledSlice> load_split(const SplitManifest& manifest, Split split,
                                     const std::string& dataset_dir) {
  std::vector<LabeledSlice> out;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    LabeledSlice s;
    s.locator = e.path;
    s.patient_id = e.patient_id;
    s.study_id = e.study_id;
    s.label = e.label;
    s.pixels = read_slice_pixels((fs::path(dataset_dir) / e.path).string());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<LabeledSlice> select_split(const std::vector<SliceRecord>& records,
                                       const SplitManifest& manifest, Split split) {
  std::map<std::string, Split> tags;
  for (const auto& e : manifest.entries) tags[e.patient_id] = e.split;
  std::vector<LabeledSlice> out;
  for (const auto& rec : records) {
    auto it = tags.find(rec.patient_id);
    if (it == tags.end() || it->second != split) continue;
    LabeledSlice s;
    s.locator = record_locator(rec);
    s.patient_id = rec.patient_id;
    s.study_id = rec.study_id;
    s.label = rec.label;
    s.pixels = rec.pixels;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<UnlabeledSlice> strip_labels(const std::vector<LabeledSlice>& slices) {
  std::vector<UnlabeledSlice> out;
  out.reserve(slices.size());
  for (const auto& s : slices) out.push_back({s.locator, s.pixels});
  return out;
}

}  // namespace seqssl
