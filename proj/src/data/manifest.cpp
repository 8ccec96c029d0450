#include "seqssl/data/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "seqssl/rng.hpp"

namespace seqssl {

using nlohmann::json;

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw ValidationError("split: unknown enum value");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("split: unknown tag '" + s + "'");
}

std::vector<ManifestEntry> SplitManifest::split_entries(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(e);
  return out;
}

size_t SplitManifest::count(Split split) const {
  size_t n = 0;
  for (const auto& e : entries) n += e.split == split ? 1 : 0;
  return n;
}

std::array<size_t, 3> largest_remainder_counts(size_t n_patients,
                                               const std::array<double, 3>& ratios) {
  std::array<size_t, 3> counts{};
  std::array<double, 3> remainders{};
  size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double target = ratios[i] * static_cast<double>(n_patients);
    counts[i] = static_cast<size_t>(std::floor(target));
    remainders[i] = target - std::floor(target);
    assigned += counts[i];
  }
  // hand out the leftovers by remainder, ties to the earlier split
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  size_t leftover = n_patients - assigned;
  for (size_t i = 0; i < leftover; ++i) counts[order[i % 3]] += 1;
  return counts;
}

SplitManifest split_by_patient(const std::vector<SliceRecord>& records,
                               const std::array<double, 3>& ratios, uint64_t seed,
                               const std::vector<std::string>& locators) {
  require(!records.empty(), "split_by_patient: records must be nonempty");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  require(std::fabs(sum - 1.0) <= 1e-9, "split_by_patient: ratios must sum to 1");
  for (double r : ratios) require(r >= 0.0, "split_by_patient: ratios must be >= 0");
  require(locators.empty() || locators.size() == records.size(),
          "split_by_patient: locators must match records");

  std::set<std::string> patient_set;
  for (const auto& r : records) patient_set.insert(r.patient_id);
  std::vector<std::string> patients(patient_set.begin(), patient_set.end());

  size_t nonzero = 0;
  for (double r : ratios) nonzero += r > 0.0 ? 1 : 0;
  require(patients.size() >= nonzero,
          "split_by_patient: fewer patients than nonzero-ratio splits");

  Rng rng(seed);
  shuffle(patients, rng);
  const auto counts = largest_remainder_counts(patients.size(), ratios);

  std::map<std::string, Split> tag;
  size_t pos = 0;
  for (int s = 0; s < 3; ++s) {
    for (size_t i = 0; i < counts[s]; ++i) tag[patients[pos++]] = static_cast<Split>(s);
  }

  SplitManifest manifest;
  manifest.seed = seed;
  manifest.ratios = ratios;
  manifest.entries.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    ManifestEntry e;
    e.path = locators.empty() ? "" : locators[i];
    e.patient_id = r.patient_id;
    e.study_id = r.study_id;
    e.label = r.label;
    e.plane = r.plane;
    e.slice_index = r.slice_index;
    e.split = tag.at(r.patient_id);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const SplitManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_manifest: cannot open '" + path + "'");
  for (const auto& e : manifest.entries) {
    json j;
    j["path"] = e.path;
    j["patient_id"] = e.patient_id;
    j["study_id"] = e.study_id;
    j["label"] = to_string(e.label);
    j["plane"] = to_string(e.plane);
    j["slice_index"] = e.slice_index;
    j["split"] = to_string(e.split);
    out << j.dump() << "\n";
  }
  json meta;
  meta["seed"] = manifest.seed;
  meta["ratios"] = manifest.ratios;
  std::ofstream mout(path + ".meta.json", std::ios::binary);
  require(mout.good(), "write_manifest: cannot open '" + path + ".meta.json'");
  mout << meta.dump(2) << "\n";
}

SplitManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_manifest: cannot open '" + path + "'");
  SplitManifest manifest;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.patient_id = j.at("patient_id").get<std::string>();
    e.study_id = j.at("study_id").get<std::string>();
    e.label = sequence_label_from_string(j.at("label").get<std::string>());
    e.plane = plane_from_string(j.at("plane").get<std::string>());
    e.slice_index = j.at("slice_index").get<int>();
    e.split = split_from_string(j.at("split").get<std::string>());
    manifest.entries.push_back(std::move(e));
  }
  std::ifstream min(path + ".meta.json");
  if (min.good()) {
    json meta = json::parse(min);
    manifest.seed = meta.value("seed", 0ULL);
    if (meta.contains("ratios")) {
      auto r = meta["ratios"].get<std::vector<double>>();
      if (r.size() == 3) manifest.ratios = {r[0], r[1], r[2]};
    }
  }
  return manifest;
}

}  // namespace seqssl
