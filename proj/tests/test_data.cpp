#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "seqssl/data/io.hpp"
#include "seqssl/data/manifest.hpp"
#include "seqssl/data/phantom.hpp"
#include "seqssl/data/slices.hpp"
#include "seqssl/rng.hpp"

using namespace seqssl;
namespace fs = std::filesystem;

namespace {

Volume make_volume(const std::string& patient, int d, int h, int w, float fill = 0.0f) {
  Volume v;
  v.patient_id = patient;
  v.study_id = patient + "_s0";
  v.label = SequenceLabel::kT1;
  v.d = d;
  v.h = h;
  v.w = w;
  v.voxels.assign(static_cast<size_t>(d) * h * w, fill);
  return v;
}

// Nearest-class-mean on raw central axial slices: means from even-indexed
// studies, evaluation on odd-indexed ones.
double nearest_class_mean_accuracy(const std::vector<Volume>& volumes, double fraction) {
  std::map<int, std::vector<const Volume*>> by_class;
  for (const auto& v : volumes) by_class[static_cast<int>(v.label)].push_back(&v);

  auto axial_slices = [&](const Volume& v) {
    return extract_central_slices(v, fraction, {Plane::kAxial});
  };

  std::map<int, std::vector<double>> mean;
  std::map<int, size_t> count;
  for (auto& [cls, vols] : by_class) {
    for (size_t s = 0; s < vols.size(); s += 2) {
      for (const auto& rec : axial_slices(*vols[s])) {
        auto& acc = mean[cls];
        acc.resize(rec.pixels.size(), 0.0);
        for (size_t i = 0; i < rec.pixels.size(); ++i) acc[i] += rec.pixels.v[i];
        count[cls] += 1;
      }
    }
  }
  for (auto& [cls, acc] : mean) {
    for (auto& v : acc) v /= static_cast<double>(count[cls]);
  }

  size_t correct = 0, total = 0;
  for (auto& [cls, vols] : by_class) {
    for (size_t s = 1; s < vols.size(); s += 2) {
      for (const auto& rec : axial_slices(*vols[s])) {
        int best = -1;
        double best_d = 0.0;
        for (const auto& [mc, mv] : mean) {
          double dist = 0.0;
          for (size_t i = 0; i < mv.size(); ++i) {
            const double diff = rec.pixels.v[i] - mv[i];
            dist += diff * diff;
          }
          if (best < 0 || dist < best_d) {
            best = mc;
            best_d = dist;
          }
        }
        correct += best == cls ? 1 : 0;
        total += 1;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

// ----------------------------------------------------------------- phantom --

TEST_CASE("phantom: one study per class yields 9 volumes, one per label") {
  PhantomSpec spec{1, 20, 20, 20, 0.05, 7};
  const auto volumes = generate_phantom_dataset(spec);
  REQUIRE(volumes.size() == 9);
  std::set<int> labels;
  for (const auto& v : volumes) labels.insert(static_cast<int>(v.label));
  CHECK(labels.size() == 9);
  for (const auto& v : volumes) v.validate();
}

TEST_CASE("phantom: bitwise deterministic given the seed") {
  PhantomSpec spec{2, 16, 16, 16, 0.1, 99};
  const auto a = generate_phantom_dataset(spec);
  const auto b = generate_phantom_dataset(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].patient_id == b[i].patient_id);
    CHECK(a[i].voxels == b[i].voxels);
  }
  PhantomSpec other = spec;
  other.seed = 100;
  const auto c = generate_phantom_dataset(other);
  CHECK(a[0].voxels != c[0].voxels);
}

TEST_CASE("phantom: classes separable by the nearest-class-mean oracle") {
  PhantomSpec spec{20, 24, 24, 24, 0.1, 5};
  const auto volumes = generate_phantom_dataset(spec);
  const double acc = nearest_class_mean_accuracy(volumes, 0.3);
  CHECK(acc >= 0.8);
}

TEST_CASE("phantom: validation errors") {
  CHECK_THROWS_AS(generate_phantom_dataset(PhantomSpec{0, 8, 8, 8, 0.1, 0}), ValidationError);
  CHECK_THROWS_AS(generate_phantom_dataset(PhantomSpec{1, 0, 8, 8, 0.1, 0}), ValidationError);
  CHECK_THROWS_AS(generate_phantom_dataset(PhantomSpec{1, 8, 8, 8, -0.1, 0}), ValidationError);
}

// ---------------------------------------------------------- central slices --

TEST_CASE("central slices: fraction 0.3 of length 100 keeps indices 35..64") {
  Volume v = make_volume("p0", 100, 10, 10);
  const auto recs = extract_central_slices(v, 0.3, {Plane::kAxial});
  REQUIRE(recs.size() == 30);
  CHECK(recs.front().slice_index == 35);
  CHECK(recs.back().slice_index == 64);
}

TEST_CASE("central slices: fraction 1.0 keeps every slice of every plane") {
  Volume v = make_volume("p0", 12, 14, 16);
  const auto recs =
      extract_central_slices(v, 1.0, {Plane::kAxial, Plane::kCoronal, Plane::kSagittal});
  CHECK(recs.size() == 12u + 14u + 16u);
}

TEST_CASE("central slices: 3 planes of a cube give 3 * round(f*L) records") {
  Volume v = make_volume("p0", 100, 100, 100);
  const auto recs =
      extract_central_slices(v, 0.3, {Plane::kAxial, Plane::kCoronal, Plane::kSagittal});
  CHECK(recs.size() == 90);
}

TEST_CASE("central slices: count law over random lengths and fractions") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(rng.below(60));
    const double fraction = 0.01 + 0.99 * rng.uniform();
    Volume v = make_volume("p0", len, 4, 4);
    const auto recs = extract_central_slices(v, fraction, {Plane::kAxial});
    const int expect_k = std::max<long long>(1, std::llround(fraction * len));
    CHECK(static_cast<int>(recs.size()) == expect_k);
    CHECK(recs.front().slice_index == (len - expect_k) / 2);
  }
}

TEST_CASE("central slices: plane geometry matches the volume layout") {
  Volume v = make_volume("p0", 3, 4, 5);
  for (int z = 0; z < 3; ++z)
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 5; ++x) v.at(z, y, x) = static_cast<float>(100 * z + 10 * y + x);
  const auto ax = extract_central_slices(v, 1.0, {Plane::kAxial});
  CHECK(ax[1].pixels.h == 4);
  CHECK(ax[1].pixels.w == 5);
  CHECK(ax[1].pixels.at(2, 3) == doctest::Approx(123.0f));
  const auto cor = extract_central_slices(v, 1.0, {Plane::kCoronal});
  CHECK(cor[1].pixels.h == 3);
  CHECK(cor[1].pixels.w == 5);
  CHECK(cor[1].pixels.at(2, 4) == doctest::Approx(214.0f));
  const auto sag = extract_central_slices(v, 1.0, {Plane::kSagittal});
  CHECK(sag[1].pixels.h == 3);
  CHECK(sag[1].pixels.w == 4);
  CHECK(sag[1].pixels.at(0, 3) == doctest::Approx(31.0f));
}

TEST_CASE("central slices: invalid inputs") {
  Volume v = make_volume("p0", 10, 10, 10);
  CHECK_THROWS_AS(extract_central_slices(v, 0.0, {Plane::kAxial}), ValidationError);
  CHECK_THROWS_AS(extract_central_slices(v, 1.5, {Plane::kAxial}), ValidationError);
  CHECK_THROWS_AS(extract_central_slices(v, 0.3, {}), ValidationError);
  Volume empty;
  CHECK_THROWS_AS(extract_central_slices(empty, 0.3, {Plane::kAxial}), ValidationError);
}

// -------------------------------------------------------------- resampling --

TEST_CASE("resample: target shape is exact") {
  Image in(256, 256);
  Rng rng(3);
  for (auto& v : in.v) v = static_cast<float>(rng.uniform());
  const Image out = resample_slice(in, 84, 84);
  CHECK(out.h == 84);
  CHECK(out.w == 84);
}

TEST_CASE("resample: identity when already target-sized") {
  Image in(33, 41);
  Rng rng(4);
  for (auto& v : in.v) v = static_cast<float>(rng.uniform(-3.0, 3.0));
  const Image out = resample_slice(in, 33, 41);
  for (size_t i = 0; i < in.v.size(); ++i) CHECK(std::fabs(out.v[i] - in.v[i]) <= 1e-6f);
}

TEST_CASE("resample: constants stay exactly constant") {
  Image in(17, 9, 5.0f);
  for (auto [th, tw] : {std::pair{84, 84}, {3, 200}, {1, 1}}) {
    const Image out = resample_slice(in, th, tw);
    for (float v : out.v) CHECK(v == 5.0f);
  }
}

TEST_CASE("resample: bilinear output range never exceeds the input range") {
  Rng rng(90);
  for (int trial = 0; trial < 25; ++trial) {
    Image in(2 + static_cast<int>(rng.below(40)), 2 + static_cast<int>(rng.below(40)));
    for (auto& v : in.v) v = static_cast<float>(rng.uniform(-10.0, 10.0));
    const Image out = resample_slice(in, 1 + static_cast<int>(rng.below(50)),
                                     1 + static_cast<int>(rng.below(50)));
    const auto [in_min, in_max] = std::minmax_element(in.v.begin(), in.v.end());
    for (float v : out.v) {
      CHECK(v >= *in_min - 1e-9f);
      CHECK(v <= *in_max + 1e-9f);
    }
  }
}

TEST_CASE("resample: rejects non-finite input") {
  Image in(4, 4, 1.0f);
  in.at(2, 2) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(resample_slice(in, 8, 8), ValidationError);
}

// ----------------------------------------------------------- normalization --

TEST_CASE("normalize: min-max maps to [0, 1] with endpoints hit") {
  Image in(5, 5);
  Rng rng(8);
  for (auto& v : in.v) v = static_cast<float>(rng.uniform(10.0, 110.0));
  in.at(0, 0) = 10.0f;
  in.at(4, 4) = 110.0f;
  const Image out = normalize_intensity(in);
  const auto [mn, mx] = std::minmax_element(out.v.begin(), out.v.end());
  CHECK(*mn == 0.0f);
  CHECK(*mx == 1.0f);
}

TEST_CASE("normalize: constant slice maps to all zeros") {
  Image in(6, 6, 42.0f);
  const Image out = normalize_intensity(in);
  for (float v : out.v) CHECK(v == 0.0f);
}

TEST_CASE("normalize: idempotent") {
  Image in(7, 7);
  Rng rng(15);
  for (auto& v : in.v) v = static_cast<float>(rng.uniform(-5.0, 9.0));
  const Image once = normalize_intensity(in);
  const Image twice = normalize_intensity(once);
  CHECK(once.v == twice.v);
}

// ------------------------------------------------------------------ splits --

namespace {

std::vector<SliceRecord> records_for_patients(int n_patients, int slices_each) {
  std::vector<SliceRecord> recs;
  for (int p = 0; p < n_patients; ++p) {
    for (int s = 0; s < slices_each; ++s) {
      SliceRecord r;
      r.patient_id = "p" + std::to_string(p);
      r.study_id = r.patient_id + "_s0";
      r.label = static_cast<SequenceLabel>(p % 9);
      r.plane = Plane::kAxial;
      r.slice_index = s;
      r.pixels = Image(4, 4, static_cast<float>(p));
      recs.push_back(std::move(r));
    }
  }
  return recs;
}

}  // namespace

TEST_CASE("split: 10 patients at 0.7/0.1/0.2 gives 7/1/2") {
  const auto recs = records_for_patients(10, 3);
  const auto manifest = split_by_patient(recs, {0.7, 0.1, 0.2}, 44);
  std::map<Split, std::set<std::string>> patients;
  for (const auto& e : manifest.entries) patients[e.split].insert(e.patient_id);
  CHECK(patients[Split::kTrain].size() == 7);
  CHECK(patients[Split::kVal].size() == 1);
  CHECK(patients[Split::kTest].size() == 2);
}

TEST_CASE("split: single patient with ratios (1,0,0) tags everything train") {
  const auto recs = records_for_patients(1, 5);
  const auto manifest = split_by_patient(recs, {1.0, 0.0, 0.0}, 0);
  for (const auto& e : manifest.entries) CHECK(e.split == Split::kTrain);
}

TEST_CASE("split: patient disjointness and exact largest-remainder sizes") {
  const auto recs = records_for_patients(23, 2);
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    const auto manifest = split_by_patient(recs, {0.7, 0.1, 0.2}, seed);
    std::map<Split, std::set<std::string>> patients;
    for (const auto& e : manifest.entries) patients[e.split].insert(e.patient_id);
    // all records of one patient share a tag <=> patient appears in one set
    size_t total = 0;
    for (const auto& [_, set] : patients) total += set.size();
    CHECK(total == 23);
    // largest remainder on 23 * (0.7, 0.1, 0.2): floors (16,2,4), leftover 1
    // goes to train (remainder .1 vs .3 vs .6 -> test)
    CHECK(patients[Split::kTrain].size() == 16);
    CHECK(patients[Split::kVal].size() == 2);
    CHECK(patients[Split::kTest].size() == 5);
  }
}

TEST_CASE("split: deterministic manifest bytes for a fixed seed") {
  const auto recs = records_for_patients(9, 2);
  const auto m1 = split_by_patient(recs, {0.7, 0.1, 0.2}, 123);
  const auto m2 = split_by_patient(recs, {0.7, 0.1, 0.2}, 123);
  const fs::path dir = fs::temp_directory_path() / "seqssl_manifest_test";
  fs::create_directories(dir);
  write_manifest(m1, (dir / "a.jsonl").string());
  write_manifest(m2, (dir / "b.jsonl").string());
  std::ifstream fa(dir / "a.jsonl"), fb(dir / "b.jsonl");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());

  const auto loaded = read_manifest((dir / "a.jsonl").string());
  CHECK(loaded.entries.size() == m1.entries.size());
  CHECK(loaded.seed == m1.seed);
  for (size_t i = 0; i < loaded.entries.size(); ++i) {
    CHECK(loaded.entries[i].patient_id == m1.entries[i].patient_id);
    CHECK(loaded.entries[i].split == m1.entries[i].split);
  }
}

TEST_CASE("split: validation errors") {
  const auto recs = records_for_patients(2, 1);
  CHECK_THROWS_AS(split_by_patient(recs, {0.5, 0.2, 0.2}, 0), ValidationError);
  CHECK_THROWS_AS(split_by_patient(recs, {0.7, 0.1, 0.2}, 0), ValidationError);
  CHECK_THROWS_AS(split_by_patient({}, {0.7, 0.1, 0.2}, 0), ValidationError);
}

// ---------------------------------------------------------------- containers --

TEST_CASE("volume container: round-trips through JSON header + raw payload") {
  PhantomSpec spec{1, 10, 12, 14, 0.05, 21};
  const auto volumes = generate_phantom_dataset(spec);
  const fs::path dir = fs::temp_directory_path() / "seqssl_vol_test";
  fs::remove_all(dir);
  write_volume_dataset(volumes, dir.string());
  const auto loaded = read_volume_dataset(dir.string());
  REQUIRE(loaded.size() == volumes.size());
  std::map<std::string, const Volume*> by_patient;
  for (const auto& v : volumes) by_patient[v.patient_id] = &v;
  for (const auto& v : loaded) {
    const Volume* orig = by_patient.at(v.patient_id);
    CHECK(v.study_id == orig->study_id);
    CHECK(v.label == orig->label);
    CHECK(v.voxels == orig->voxels);  // bitwise
  }
}

TEST_CASE("ingest: slices, manifest and dataset meta on disk") {
  PhantomSpec spec{2, 12, 12, 12, 0.05, 33};
  const auto volumes = generate_phantom_dataset(spec);
  const fs::path vols = fs::temp_directory_path() / "seqssl_ingest_vols";
  const fs::path data = fs::temp_directory_path() / "seqssl_ingest_data";
  fs::remove_all(vols);
  fs::remove_all(data);
  write_volume_dataset(volumes, vols.string());

  IngestOptions opt;
  opt.fraction = 0.3;
  opt.target_size = 32;
  opt.seed = 9;
  const auto manifest = ingest_volumes(vols.string(), data.string(), opt);
  // 18 volumes * 3 planes * max(1, round(0.3*12)) = 18 * 3 * 4
  CHECK(manifest.entries.size() == 18u * 12u);
  CHECK(fs::exists(data / "dataset.json"));

  const auto train = load_split(manifest, Split::kTrain, data.string());
  REQUIRE(!train.empty());
  CHECK(train[0].pixels.h == 32);
  CHECK(train[0].pixels.w == 32);

  // slice file round trip is bitwise
  const Image reread = read_slice_pixels((data / manifest.entries[0].path).string());
  bool found = false;
  for (const auto& split : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (const auto& s : load_split(manifest, split, data.string())) {
      if (s.locator == manifest.entries[0].path) {
        CHECK(s.pixels.v == reread.v);
        found = true;
      }
    }
  }
  CHECK(found);
}
