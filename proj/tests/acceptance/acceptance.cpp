// Acceptance suite: runs every gate end to end and prints one PASS/FAIL line
// per criterion. Exit code is the number of failed criteria.
//
// The heavy phantom experiment (criteria 8 and 9) pre-trains resnet_tiny
// with the stop-gradient objective for 50 epochs on ~2,700 synthetic slices
// and fine-tunes at five label fractions across three seeds; its artifacts
// are shared by the checkpoint round-trip gate (11).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "seqssl/augment/augment.hpp"
#include "seqssl/data/io.hpp"
#include "seqssl/data/manifest.hpp"
#include "seqssl/data/phantom.hpp"
#include "seqssl/data/slices.hpp"
#include "seqssl/objectives/losses.hpp"
#include "seqssl/report/report.hpp"
#include "seqssl/train/trainer.hpp"

#include "../support/oracles.hpp"

using namespace seqssl;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_suite_start;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s  criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Matrix64 random_matrix(int rows, int cols, Rng& rng) {
  Matrix64 m(rows, cols);
  for (auto& v : m.v) v = rng.normal();
  return m;
}

// ---------------------------------------------------------------------------
// 1. NT-Xent oracle equivalence over 200 random batches, < 10 s
// ---------------------------------------------------------------------------
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240801);
  double max_err = 0.0;
  const double taus[3] = {0.1, 0.5, 1.0};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));   // N in 2..8
    const int d = 3 + static_cast<int>(rng.below(14));  // d in 3..16
    const double tau = taus[rng.below(3)];
    const Matrix64 z = random_matrix(2 * n, d, rng);
    const double impl = nt_xent_loss(z, tau).loss;
    const double ref = oracle::nt_xent_brute_force(z, tau);
    max_err = std::max(max_err, std::fabs(impl - ref));
  }
  const double dt = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "NT-Xent vs brute-force oracle, 200 batches: max |diff| = %.2e (<= 1e-6), "
                "%.2f s (< 10 s)",
                max_err, dt);
  report(1, max_err <= 1e-6 && dt < 10.0, buf);
}

// ---------------------------------------------------------------------------
// 2. NT-Xent with N = 1: no negatives exist, loss <= 1e-9
// ---------------------------------------------------------------------------
void criterion_2() {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix64 z = random_matrix(2, 1 + static_cast<int>(rng.below(16)), rng);
    worst = std::max(worst, std::fabs(nt_xent_loss(z, 0.5).loss));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "NT-Xent N=1 degenerate case: max |loss| = %.2e (<= 1e-9)",
                worst);
  report(2, worst <= 1e-9, buf);
}

// ---------------------------------------------------------------------------
// 3. Stop-gradient contracts: aligned -> -1, orthogonal -> 0, dz == 0
// ---------------------------------------------------------------------------
void criterion_3() {
  Rng rng(3);
  const int n = 6, d = 8;
  const Matrix64 a = random_matrix(n, d, rng);
  const Matrix64 b = random_matrix(n, d, rng);
  const auto aligned = simsiam_loss(b, a, a, b);  // p1 = z2, p2 = z1
  const bool aligned_ok = std::fabs(aligned.loss + 1.0) <= 1e-9;

  Matrix64 p1(n, d), p2(n, d), z1(n, d), z2(n, d);
  for (int i = 0; i < n; ++i) {
    p1.at(i, 0) = 1.0;
    z2.at(i, 1) = 1.0;
    p2.at(i, 2) = 1.0;
    z1.at(i, 3) = 1.0;
  }
  const auto ortho = simsiam_loss(p1, p2, z1, z2);
  const bool ortho_ok = std::fabs(ortho.loss) <= 1e-9;

  const auto g = simsiam_loss(random_matrix(n, d, rng), random_matrix(n, d, rng),
                              random_matrix(n, d, rng), random_matrix(n, d, rng));
  bool dz_zero = true;
  for (double v : g.dz1.v) dz_zero = dz_zero && v == 0.0;
  for (double v : g.dz2.v) dz_zero = dz_zero && v == 0.0;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "stop-gradient contracts: aligned loss %+.2e vs -1, orthogonal %+.2e vs 0, "
                "dz exactly zero: %s",
                aligned.loss, ortho.loss, dz_zero ? "yes" : "no");
  report(3, aligned_ok && ortho_ok && dz_zero, buf);
}

// ---------------------------------------------------------------------------
// 4. Finite-difference gradient checks for all three losses
// ---------------------------------------------------------------------------
void criterion_4() {
  Rng rng(4);
  double worst = 0.0;

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const int d = 3 + static_cast<int>(rng.below(14));
    const double tau = trial % 2 == 0 ? 0.5 : 0.1;
    Matrix64 z = random_matrix(2 * n, d, rng);
    const auto res = nt_xent_loss(z, tau);
    const auto fd = oracle::finite_diff(
        [&](const std::vector<double>& x) {
          Matrix64 zx = z;
          zx.v = x;
          return nt_xent_loss(zx, tau).loss;
        },
        z.v);
    worst = std::max(worst, oracle::max_rel_error(res.grad.v, fd));
  }

  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(8));
    const int d = 2 + static_cast<int>(rng.below(15));
    Matrix64 p1 = random_matrix(n, d, rng), p2 = random_matrix(n, d, rng);
    Matrix64 z1 = random_matrix(n, d, rng), z2 = random_matrix(n, d, rng);
    const auto res = simsiam_loss(p1, p2, z1, z2);
    const auto fd1 = oracle::finite_diff(
        [&](const std::vector<double>& x) {
          Matrix64 px = p1;
          px.v = x;
          return simsiam_loss(px, p2, z1, z2).loss;
        },
        p1.v);
    const auto fd2 = oracle::finite_diff(
        [&](const std::vector<double>& x) {
          Matrix64 px = p2;
          px.v = x;
          return simsiam_loss(p1, px, z1, z2).loss;
        },
        p2.v);
    worst = std::max({worst, oracle::max_rel_error(res.dp1.v, fd1),
                      oracle::max_rel_error(res.dp2.v, fd2)});
  }

  for (int trial = 0; trial < 20; ++trial) {
    const int b = 1 + static_cast<int>(rng.below(8));
    Matrix64 logits = random_matrix(b, 9, rng);
    std::vector<int> labels;
    for (int i = 0; i < b; ++i) labels.push_back(static_cast<int>(rng.below(9)));
    const auto res = cross_entropy_9way(logits, labels);
    const auto fd = oracle::finite_diff(
        [&](const std::vector<double>& x) {
          Matrix64 lx = logits;
          lx.v = x;
          return cross_entropy_9way(lx, labels).loss;
        },
        logits.v);
    worst = std::max(worst, oracle::max_rel_error(res.dlogits.v, fd));
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "analytic vs central finite differences (h=1e-5), 20 instances per loss: "
                "max rel err = %.2e (<= 1e-4)",
                worst);
  report(4, worst <= 1e-4, buf);
}

// ---------------------------------------------------------------------------
// 5. Split hygiene across 1000 seeded manifests
// ---------------------------------------------------------------------------
void criterion_5() {
  bool disjoint = true;
  bool sizes_exact = true;
  const std::array<double, 3> ratios = {0.7, 0.1, 0.2};
  for (uint64_t seed = 0; seed < 1000 && (disjoint && sizes_exact); ++seed) {
    const size_t n_patients = 3 + seed % 97;
    std::vector<SliceRecord> records;
    for (size_t p = 0; p < n_patients; ++p) {
      for (int s = 0; s < 2; ++s) {
        SliceRecord r;
        r.patient_id = "p" + std::to_string(p);
        r.study_id = r.patient_id + "_s";
        r.label = static_cast<SequenceLabel>(p % 9);
        r.slice_index = s;
        r.pixels = Image(2, 2, 1.0f);
        records.push_back(std::move(r));
      }
    }
    const auto manifest = split_by_patient(records, ratios, seed);
    std::array<std::set<std::string>, 3> sets;
    for (const auto& e : manifest.entries) sets[static_cast<int>(e.split)].insert(e.patient_id);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        for (const auto& id : sets[a]) disjoint = disjoint && sets[b].count(id) == 0;
      }
    }
    // independent largest-remainder computation
    std::array<double, 3> targets{};
    std::array<size_t, 3> floors{};
    size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
      targets[i] = ratios[i] * static_cast<double>(n_patients);
      floors[i] = static_cast<size_t>(std::floor(targets[i]));
      assigned += floors[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return targets[a] - std::floor(targets[a]) > targets[b] - std::floor(targets[b]);
    });
    for (size_t i = 0; i < n_patients - assigned; ++i) floors[order[i % 3]] += 1;
    for (int i = 0; i < 3; ++i) sizes_exact = sizes_exact && sets[i].size() == floors[i];
  }
  report(5, disjoint && sizes_exact,
         std::string("split hygiene over 1000 seeded manifests: patient overlap ") +
             (disjoint ? "none" : "FOUND") + ", largest-remainder sizes " +
             (sizes_exact ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------------------
// 6. Augmentation suite
// ---------------------------------------------------------------------------
void criterion_6() {
  Rng seeder(6);
  bool flip_ok = true, elastic_ok = true, rotation_ok = true, chain_ok = true, range_ok = true;

  for (int trial = 0; trial < 20; ++trial) {
    Image img(20 + static_cast<int>(seeder.below(30)), 20 + static_cast<int>(seeder.below(30)));
    for (auto& v : img.v) v = static_cast<float>(seeder.uniform());

    AugmentConfig mirror;
    mirror.p_flip_h = trial % 2 == 0 ? 1.0 : 0.0;
    mirror.p_flip_v = 1.0 - mirror.p_flip_h;
    mirror.rotation_lo_deg = mirror.rotation_hi_deg = 0.0;
    mirror.elastic_alpha = 0.0;
    Rng r1(trial), r2(trial + 1);
    flip_ok = flip_ok && random_flip(random_flip(img, mirror, r1), mirror, r2).v == img.v;

    AugmentConfig zero_elastic;
    zero_elastic.elastic_alpha = 0.0;
    Rng r3(trial);
    const Image el = elastic_deform(img, zero_elastic, r3);
    for (size_t i = 0; i < img.v.size(); ++i) {
      elastic_ok = elastic_ok && std::fabs(el.v[i] - img.v[i]) <= 1e-6f;
    }

    AugmentConfig zero_rot;
    zero_rot.rotation_lo_deg = zero_rot.rotation_hi_deg = 0.0;
    Rng r4(trial);
    const Image rot = random_rotation(img, zero_rot, r4);
    for (size_t i = 0; i < img.v.size(); ++i) {
      rotation_ok = rotation_ok && std::fabs(rot.v[i] - img.v[i]) <= 1e-6f;
    }

    AugmentConfig full;  // defaults: everything active
    const uint64_t pair_seed = seeder.next_u64();
    const ViewPair pa = make_view_pair(img, "s", full, pair_seed);
    const ViewPair pb = make_view_pair(img, "s", full, pair_seed);
    chain_ok = chain_ok && pa.view_a.v == pb.view_a.v && pa.view_b.v == pb.view_b.v;

    const auto [mn, mx] = std::minmax_element(img.v.begin(), img.v.end());
    const float lo = std::min(0.0f, *mn) - 1e-6f;
    const float hi = std::max(0.0f, *mx) + 1e-6f;
    for (const Image* view : {&pa.view_a, &pa.view_b}) {
      for (float v : view->v) range_ok = range_ok && v >= lo && v <= hi;
    }
  }

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "augmentations: double-flip bitwise %s, zero-amplitude elastic %s, zero-range "
                "rotation %s, chain determinism %s, intensity range %s",
                flip_ok ? "ok" : "FAIL", elastic_ok ? "ok" : "FAIL",
                rotation_ok ? "ok" : "FAIL", chain_ok ? "ok" : "FAIL",
                range_ok ? "ok" : "FAIL");
  report(6, flip_ok && elastic_ok && rotation_ok && chain_ok && range_ok, buf);
}

// ---------------------------------------------------------------------------
// 7. Central-slice law on 100 random (length, fraction) pairs
// ---------------------------------------------------------------------------
void criterion_7() {
  Rng rng(7);
  bool ok = true;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const int len = 1 + static_cast<int>(rng.below(200));
    const double fraction = 0.005 + 0.995 * rng.uniform();
    Volume v;
    v.patient_id = "p";
    v.study_id = "s";
    v.d = len;
    v.h = 4;
    v.w = 4;
    v.voxels.assign(static_cast<size_t>(len) * 16, 0.0f);
    const auto recs = extract_central_slices(v, fraction, {Plane::kAxial});
    const long long expect_k = std::max<long long>(1, std::llround(fraction * len));
    ok = ok && static_cast<long long>(recs.size()) == expect_k &&
         recs.front().slice_index == (len - static_cast<int>(expect_k)) / 2;
  }
  report(7, ok,
         "central-slice law, 100 random (L, fraction) pairs: count max(1, round(f*L)) and "
         "start floor((L-k)/2)");
}

// ---------------------------------------------------------------------------
// 8 + 9 + 11. Phantom end-to-end, silhouette improvement, checkpoint
// round-trip. Settings are frozen here; 3 seeds.
// ---------------------------------------------------------------------------
struct PhantomRun {
  std::map<double, double> warm_acc;  // fraction -> test accuracy
  std::map<double, double> cold_acc;  // low fractions only
  double silhouette_init = 0.0;
  double silhouette_pretrained = 0.0;
  Checkpoint finetuned_full;  // fraction 1.0 checkpoint (for gate 11)
};

struct PhantomSettings {
  int n_studies_per_class = 10;
  int volume_dim = 34;
  double noise_level = 0.1;
  uint64_t data_seed = 20240808;
  int resolution = 32;
  int pretrain_epochs = 50;
  int pretrain_batch = 32;
  double pretrain_lr = 0.0125;
  int finetune_epochs = 30;
  int finetune_patience = 12;
  int finetune_batch = 32;
  double finetune_lr = 0.01;
};

PhantomRun run_phantom_seed(const PhantomSettings& s, uint64_t seed,
                            const std::vector<LabeledSlice>& train,
                            const std::vector<LabeledSlice>& val,
                            const std::vector<LabeledSlice>& test) {
  PretrainConfig pc;
  pc.framework = Framework::kSimsiam;
  pc.epochs = s.pretrain_epochs;
  pc.batch_size = s.pretrain_batch;
  pc.resolution = s.resolution;
  pc.optim.lr = s.pretrain_lr;
  pc.seed = seed;
  const PretrainResult pre =
      pretrain(pc, strip_labels(train), strip_labels(val), ModelSpec::resnet_tiny());

  PhantomRun run;
  {
    auto init_model = build_model(ModelSpec::resnet_tiny(), mix64(seed, 0x696e6974ULL));
    const EmbeddingSet e0 = extract_embeddings(*init_model, test, s.resolution);
    run.silhouette_init = silhouette_score(e0.vectors, e0.labels);
    auto trained = model_from_checkpoint(pre.checkpoint);
    const EmbeddingSet e1 = extract_embeddings(*trained, test, s.resolution);
    run.silhouette_pretrained = silhouette_score(e1.vectors, e1.labels);
  }

  for (const double fraction : {0.005, 0.01, 0.05, 0.5, 1.0}) {
    FinetuneConfig fc;
    fc.label_fraction = fraction;
    fc.epochs = s.finetune_epochs;
    fc.patience = s.finetune_patience;
    fc.batch_size = s.finetune_batch;
    fc.resolution = s.resolution;
    fc.optim.lr = s.finetune_lr;
    fc.augment_train = true;
    fc.augment.elastic_alpha = 0.0;  // light augmentation: flips only
    fc.augment.rotation_lo_deg = 0.0;
    fc.augment.rotation_hi_deg = 0.0;
    fc.seed = seed;

    fc.from_checkpoint = true;
    const FinetuneResult warm =
        finetune(pre.checkpoint, fc, train, val, test, ModelSpec::resnet_tiny());
    run.warm_acc[fraction] = warm.test_accuracy;
    if (fraction == 1.0) run.finetuned_full = warm.checkpoint;

    if (fraction <= 0.05) {
      fc.from_checkpoint = false;
      const FinetuneResult cold =
          finetune(std::nullopt, fc, train, val, test, ModelSpec::resnet_tiny());
      run.cold_acc[fraction] = cold.test_accuracy;
    }
  }
  return run;
}

std::vector<PhantomRun> g_runs;           // shared with criteria 9 and 11
std::vector<LabeledSlice> g_test_slices;  // shared with criterion 11
PhantomSettings g_settings;

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const PhantomSettings s = g_settings;

  PhantomSpec spec{s.n_studies_per_class, s.volume_dim, s.volume_dim, s.volume_dim,
                   s.noise_level, s.data_seed};
  const auto volumes = generate_phantom_dataset(spec);
  const auto records = slices_from_volumes(
      volumes, 0.3, {Plane::kSagittal, Plane::kCoronal, Plane::kAxial}, s.resolution);
  const auto manifest = split_by_patient(records, {0.7, 0.1, 0.2}, s.data_seed);
  const auto train = select_split(records, manifest, Split::kTrain);
  const auto val = select_split(records, manifest, Split::kVal);
  const auto test = select_split(records, manifest, Split::kTest);
  g_test_slices = test;
  std::printf("      phantom: %zu slices (train %zu / val %zu / test %zu)\n", records.size(),
              train.size(), val.size(), test.size());

  const std::vector<uint64_t> seeds = {11, 22, 33};
  for (uint64_t seed : seeds) {
    g_runs.push_back(run_phantom_seed(s, seed, train, val, test));
    const PhantomRun& r = g_runs.back();
    std::printf("      seed %llu: warm 0.5%%=%.3f 1%%=%.3f 5%%=%.3f 50%%=%.3f 100%%=%.3f | "
                "cold 0.5%%=%.3f 1%%=%.3f 5%%=%.3f [%.0f s]\n",
                static_cast<unsigned long long>(seed), r.warm_acc.at(0.005),
                r.warm_acc.at(0.01), r.warm_acc.at(0.05), r.warm_acc.at(0.5),
                r.warm_acc.at(1.0), r.cold_acc.at(0.005), r.cold_acc.at(0.01),
                r.cold_acc.at(0.05), seconds_since(t0));
    std::fflush(stdout);
  }

  // (a) mean accuracy at the 5% fraction >= 0.90
  double mean5 = 0.0;
  for (const auto& r : g_runs) mean5 += r.warm_acc.at(0.05) / g_runs.size();
  const bool gate_a = mean5 >= 0.90;

  // (b) seed-mean accuracy non-decreasing in fraction within 0.02
  const std::vector<double> fractions = {0.005, 0.01, 0.05, 0.5, 1.0};
  bool gate_b = true;
  double prev = -1.0;
  for (double f : fractions) {
    double mean = 0.0;
    for (const auto& r : g_runs) mean += r.warm_acc.at(f) / g_runs.size();
    gate_b = gate_b && mean >= prev - 0.02;
    prev = mean;
  }

  // (c) pretrained init beats from-scratch on the low-fraction regime in >= 2
  // of 3 seeds (mean over fractions <= 5%)
  int warm_wins = 0;
  for (const auto& r : g_runs) {
    double warm = 0.0, cold = 0.0;
    for (double f : {0.005, 0.01, 0.05}) {
      warm += r.warm_acc.at(f) / 3.0;
      cold += r.cold_acc.at(f) / 3.0;
    }
    warm_wins += warm > cold ? 1 : 0;
  }
  const bool gate_c = warm_wins >= 2;

  const double dt = seconds_since(t0);
  const bool time_ok = dt <= 1200.0;

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "phantom end-to-end: (a) 5%% mean acc %.3f >= 0.90 %s; (b) non-decreasing "
                "within 0.02 %s; (c) pretrained beats scratch %d/3 seeds %s; wall %.0f s "
                "<= 1200 %s",
                mean5, gate_a ? "ok" : "FAIL", gate_b ? "ok" : "FAIL", warm_wins,
                gate_c ? "ok" : "FAIL", dt, time_ok ? "ok" : "FAIL");
  report(8, gate_a && gate_b && gate_c && time_ok, buf);
}

void criterion_9() {
  int improved = 0;
  std::string detail = "silhouette after pre-training vs at initialization:";
  for (size_t i = 0; i < g_runs.size(); ++i) {
    const bool up = g_runs[i].silhouette_pretrained > g_runs[i].silhouette_init;
    improved += up ? 1 : 0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " seed%zu %.4f->%.4f", i + 1, g_runs[i].silhouette_init,
                  g_runs[i].silhouette_pretrained);
    detail += buf;
  }
  detail += improved == 3 ? " (3/3 improved)" : " (NOT all improved)";
  report(9, improved == 3, detail);
}

// ---------------------------------------------------------------------------
// 10. Table emission shaped like the batch-size grid, byte-deterministic
// ---------------------------------------------------------------------------
void criterion_10() {
  RunGrid grid;
  grid.fractions = {0.005, 0.01, 0.05, 0.5, 1.0};
  grid.columns = {"64", "128", "256", "512", "1024", "2048"};
  Rng rng(10);
  for (double f : grid.fractions) {
    for (const auto& c : grid.columns) {
      CellResult cell;
      cell.id = cell_id(f, c);
      cell.status = "done";
      cell.accuracy = 0.6 + 0.4 * rng.uniform();
      grid.cells[cell.id] = cell;
    }
  }
  const std::string a = render_table(grid, TableFormat::kCsv);
  const std::string b = render_table(grid, TableFormat::kCsv);

  std::vector<std::string> lines;
  std::string cur;
  for (char ch : a) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  const bool header_ok = !lines.empty() && lines[0] == "fraction,64,128,256,512,1024,2048";
  const bool rows_ok = lines.size() == 6 && lines[1].rfind("0.5%,", 0) == 0 &&
                       lines[2].rfind("1%,", 0) == 0 && lines[3].rfind("5%,", 0) == 0 &&
                       lines[4].rfind("50%,", 0) == 0 && lines[5].rfind("100%,", 0) == 0;
  const bool deterministic = a == b;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "table emission: header %s, row labels %s, byte-deterministic %s",
                header_ok ? "ok" : "FAIL", rows_ok ? "ok" : "FAIL",
                deterministic ? "ok" : "FAIL");
  report(10, header_ok && rows_ok && deterministic, buf);
}

// ---------------------------------------------------------------------------
// 11. Checkpoint round-trip: bitwise-identical test logits
// ---------------------------------------------------------------------------
void criterion_11() {
  if (g_runs.empty()) {
    report(11, false, "checkpoint round-trip skipped: no phantom checkpoint available");
    return;
  }
  const Checkpoint& ckpt = g_runs.front().finetuned_full;
  const fs::path dir = fs::temp_directory_path() / "seqssl_acceptance";
  fs::create_directories(dir);
  const std::string path = (dir / "roundtrip.ckpt").string();
  ckpt.save(path);
  const Checkpoint loaded = Checkpoint::load(path);

  auto logits_of = [&](const Checkpoint& c) {
    auto model = model_from_checkpoint(c);
    std::vector<float> all;
    constexpr int kBatch = 64;
    const auto slices = at_resolution(g_test_slices, g_settings.resolution);
    for (size_t start = 0; start < slices.size(); start += kBatch) {
      const size_t stop = std::min(slices.size(), start + kBatch);
      std::vector<const Image*> imgs;
      for (size_t i = start; i < stop; ++i) imgs.push_back(&slices[i].pixels);
      const Tensor batch = make_batch(imgs);
      const Matrix& logits = model->forward_classify(model->forward_embed(batch, false));
      all.insert(all.end(), logits.v.begin(), logits.v.end());
    }
    return all;
  };
  const bool identical = logits_of(ckpt) == logits_of(loaded);
  report(11, identical,
         std::string("checkpoint save -> load -> re-evaluate: test logits bitwise ") +
             (identical ? "identical" : "DIFFER"));
}

// ---------------------------------------------------------------------------
// 12. Shape contracts at resolutions 80/84/256 for batch sizes >= 1
// ---------------------------------------------------------------------------
void criterion_12() {
  bool ok = true;
  std::string detail = "shape contracts:";
  auto big = build_model(ModelSpec::resnet18(), 12);
  auto tiny = build_model(ModelSpec::resnet_tiny(), 12);
  Rng rng(12);
  for (int res : {80, 84, 256}) {
    for (int b : {1, 2}) {
      Tensor batch(b, res, res, 1);
      for (auto& v : batch.v) v = static_cast<float>(rng.uniform());
      const Matrix& e18 = big->forward_embed(batch, false);
      const Matrix& logit18 = big->forward_classify(e18);
      const Matrix& et = tiny->forward_embed(batch, false);
      const Matrix& z = tiny->forward_project(et, false);
      const Matrix& p = tiny->forward_predict(z, false);
      ok = ok && e18.rows == b && e18.cols == 512 && et.rows == b && et.cols == 128 &&
           z.cols == 128 && p.cols == 128 && logit18.rows == b && logit18.cols == 9;
      ok = ok && all_finite(e18.v) && all_finite(et.v) && all_finite(z.v) &&
           all_finite(p.v) && all_finite(logit18.v);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %dx%d ok;", res, res);
    detail += buf;
  }
  detail += " resnet18 -> 512, resnet_tiny -> 128, projections 128, logits 9";
  report(12, ok, detail);
}

}  // namespace

int main() {
  g_suite_start = std::chrono::steady_clock::now();
  std::printf("acceptance suite (seqssl %s)\n", kVersion);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();

  std::printf("%d/12 criteria passed, total wall time %.0f s\n", 12 - g_failures,
              seconds_since(g_suite_start));
  return g_failures;
}
