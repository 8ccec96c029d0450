#include "seqssl/data/phantom.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "seqssl/rng.hpp"

namespace seqssl {
namespace {

// Tissue compartments by normalized ellipsoid radius.
constexpr double kVentricleR = 0.22;
constexpr double kWmR = 0.52;
constexpr double kGmR = 0.78;
constexpr double kCsfR = 0.88;

// Base intensity per class for {ventricle, white matter, gray matter, csf,
// skull shell}. Slices are min-max normalized downstream, so the signatures
// must differ in contrast ORDERING and texture, not in global level: T1/T2
// invert WM vs CSF, FLAIR adds a hyperintense rim, TOF carries directional
// vessels, TraceW focal blobs, DWI speckle, ADC an enlarged bright core,
// GRE stripes, Perfusion a coarse through-plane modulation.
struct ClassSignature {
  std::array<double, 5> tissue;  // vent, wm, gm, csf, skull
  double background;
};

ClassSignature signature_for(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::kT1: return {{0.05, 0.90, 0.45, 0.10, 0.30}, 0.02};
    case SequenceLabel::kT2: return {{0.95, 0.15, 0.55, 0.90, 0.10}, 0.02};
    case SequenceLabel::kFlair: return {{0.05, 0.45, 0.70, 0.05, 0.20}, 0.02};
    case SequenceLabel::kTof: return {{0.15, 0.18, 0.12, 0.10, 0.16}, 0.02};
    case SequenceLabel::kTraceW: return {{0.30, 0.55, 0.45, 0.20, 0.12}, 0.02};
    case SequenceLabel::kDwi: return {{0.45, 0.55, 0.50, 0.05, 0.10}, 0.02};
    case SequenceLabel::kAdc: return {{1.00, 0.40, 0.50, 0.85, 0.25}, 0.02};
    case SequenceLabel::kGre: return {{0.35, 0.60, 0.50, 0.30, 0.02}, 0.02};
    case SequenceLabel::kPerfusion: return {{0.50, 0.50, 0.50, 0.50, 0.20}, 0.02};
  }
  throw ValidationError("phantom: unknown label");
}

struct StudyGeometry {
  double cz, cy, cx;        // head center (voxels)
  double az, ay, ax;        // semi-axes (voxels)
  double tilt_cos = 1.0;    // in-plane anatomy tilt
  double tilt_sin = 0.0;
  double scale;             // global scanner-unit scale jitter
  // class-specific texture parameters
  std::array<double, 5> vessel_y{}, vessel_x{};          // TOF cylinders, normalized
  std::array<std::array<double, 4>, 3> lesions{};        // TraceW blobs (z,y,x,r)
  double stripe_period = 6.0, stripe_phase = 0.0;        // GRE
  double perf_phase1 = 0.0, perf_phase2 = 0.0;           // Perfusion
};

StudyGeometry draw_geometry(Rng& rng, const PhantomSpec& spec) {
  // anatomy jitter: one labeled study must not pin down the cohort
  StudyGeometry g;
  g.cz = 0.5 * (spec.d - 1) * (1.0 + 0.08 * (rng.uniform() - 0.5));
  g.cy = 0.5 * (spec.h - 1) * (1.0 + 0.08 * (rng.uniform() - 0.5));
  g.cx = 0.5 * (spec.w - 1) * (1.0 + 0.08 * (rng.uniform() - 0.5));
  g.az = spec.d * rng.uniform(0.34, 0.45);
  g.ay = spec.h * rng.uniform(0.34, 0.45);
  g.ax = spec.w * rng.uniform(0.34, 0.45);
  g.scale = rng.uniform(0.95, 1.05);
  // canonical texture anchors with small jitter: the textures stay visible
  // in class-mean templates instead of averaging away
  constexpr double kVesselBase[5][2] = {
      {-0.30, -0.25}, {0.10, 0.35}, {0.35, -0.10}, {-0.05, 0.05}, {0.25, 0.30}};
  for (size_t i = 0; i < g.vessel_y.size(); ++i) {
    g.vessel_y[i] = kVesselBase[i][0] + rng.uniform(-0.06, 0.06);
    g.vessel_x[i] = kVesselBase[i][1] + rng.uniform(-0.06, 0.06);
  }
  for (auto& blob : g.lesions) {
    blob[0] = rng.uniform(-0.35, 0.35);
    blob[1] = rng.uniform(-0.35, 0.35);
    blob[2] = rng.uniform(-0.35, 0.35);
    blob[3] = rng.uniform(0.12, 0.20);
  }
  g.stripe_period = 6.0 + rng.uniform(-0.5, 0.5);
  g.stripe_phase = 0.4 + rng.uniform(-0.3, 0.3);
  g.perf_phase1 = 0.8 + rng.uniform(-0.3, 0.3);
  g.perf_phase2 = 2.1 + rng.uniform(-0.3, 0.3);
  return g;
}

double base_intensity(double r, const ClassSignature& sig) {
  if (r > 1.0) return sig.background;
  if (r > kCsfR) return sig.tissue[4];
  if (r > kGmR) return sig.tissue[3];
  if (r > kWmR) return sig.tissue[2];
  if (r > kVentricleR) return sig.tissue[1];
  return sig.tissue[0];
}

std::string short_label(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::kT1: return "t1";
    case SequenceLabel::kT2: return "t2";
    case SequenceLabel::kFlair: return "flair";
    case SequenceLabel::kTof: return "tof";
    case SequenceLabel::kTraceW: return "tracew";
    case SequenceLabel::kDwi: return "dwi";
    case SequenceLabel::kAdc: return "adc";
    case SequenceLabel::kGre: return "gre";
    case SequenceLabel::kPerfusion: return "perf";
  }
  return "unknown";
}

Volume generate_study(const PhantomSpec& spec, SequenceLabel label, int study_idx) {
  const int class_idx = static_cast<int>(label);
  Rng rng(mix64(spec.seed, static_cast<uint64_t>(class_idx), static_cast<uint64_t>(study_idx)));
  const StudyGeometry g = draw_geometry(rng, spec);
  ClassSignature sig = signature_for(label);
  // per-study scanner-like contrast jitter; small enough to keep the class's
  // compartment ordering intact
  for (auto& t : sig.tissue) t *= 1.0 + 0.10 * (rng.uniform() - 0.5) * 2.0;

  Volume vol;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "pat_%s_%03d", short_label(label).c_str(), study_idx);
  vol.patient_id = buf;
  std::snprintf(buf, sizeof(buf), "st_%s_%03d_0", short_label(label).c_str(), study_idx);
  vol.study_id = buf;
  vol.label = label;
  vol.d = spec.d;
  vol.h = spec.h;
  vol.w = spec.w;
  vol.voxels.resize(static_cast<size_t>(spec.d) * spec.h * spec.w);

  const double vessel_r = 0.07 * std::min(spec.h, spec.w);
  const double min_dim = std::min({spec.d, spec.h, spec.w});

  size_t idx = 0;
  for (int z = 0; z < spec.d; ++z) {
    for (int y = 0; y < spec.h; ++y) {
      for (int x = 0; x < spec.w; ++x, ++idx) {
        const double dy = y - g.cy;
        const double dx = x - g.cx;
        const double uz = (z - g.cz) / g.az;
        const double uy = (g.tilt_cos * dy - g.tilt_sin * dx) / g.ay;
        const double ux = (g.tilt_sin * dy + g.tilt_cos * dx) / g.ax;
        const double r = std::sqrt(uz * uz + uy * uy + ux * ux);
        double v = base_intensity(r, sig);

        const bool inside = r <= 1.0;
        if (inside) {
          switch (label) {
            case SequenceLabel::kFlair:
              // thick periventricular-like hyperintense ring
              if (r > 0.66 && r <= 0.80) v = 1.0;
              break;
            case SequenceLabel::kTof:
              // bright vessels running along the through-plane axis
              for (size_t i = 0; i < g.vessel_y.size(); ++i) {
                const double dy = y - (g.cy + g.vessel_y[i] * g.ay);
                const double dx = x - (g.cx + g.vessel_x[i] * g.ax);
                if (dy * dy + dx * dx <= vessel_r * vessel_r) v = 1.0;
              }
              break;
            case SequenceLabel::kTraceW:
              for (const auto& blob : g.lesions) {
                const double bz = z - (g.cz + blob[0] * g.az);
                const double by = y - (g.cy + blob[1] * g.ay);
                const double bx = x - (g.cx + blob[2] * g.ax);
                const double br = blob[3] * min_dim;
                if (bz * bz + by * by + bx * bx <= br * br) v = 1.0;
              }
              break;
            case SequenceLabel::kAdc:
              // enlarged bright core: diffusion-map look
              if (r <= 0.40) v = 1.0;
              break;
            case SequenceLabel::kGre:
              v += 0.30 * std::sin(2.0 * M_PI * y / g.stripe_period + g.stripe_phase);
              break;
            case SequenceLabel::kPerfusion:
              v += 0.40 * std::sin(2.0 * M_PI * z / spec.d + g.perf_phase1) *
                   std::cos(3.0 * M_PI * x / spec.w + g.perf_phase2);
              break;
            default:
              break;
          }
          if (label == SequenceLabel::kDwi) {
            v *= 1.0 + 0.35 * rng.normal();  // speckle
          }
        }

        v *= g.scale;
        if (spec.noise_level > 0.0) v += spec.noise_level * rng.normal();
        vol.voxels[idx] = static_cast<float>(v);
      }
    }
  }
  return vol;
}

}  // namespace

void PhantomSpec::validate() const {
  require(n_studies_per_class >= 1, "phantom.n_studies_per_class: must be >= 1");
  require(d >= 1 && h >= 1 && w >= 1, "phantom.volume_shape: dims must be >= 1");
  require(noise_level >= 0.0, "phantom.noise_level: must be >= 0");
  require(std::isfinite(noise_level), "phantom.noise_level: must be finite");
}

std::vector<Volume> generate_phantom_dataset(const PhantomSpec& spec) {
  spec.validate();
  std::vector<Volume> out;
  out.reserve(static_cast<size_t>(spec.n_studies_per_class) * kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    for (int s = 0; s < spec.n_studies_per_class; ++s) {
      out.push_back(generate_study(spec, static_cast<SequenceLabel>(c), s));
    }
  }
  return out;
}

}  // namespace seqssl
