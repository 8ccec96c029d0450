#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "seqssl/data/io.hpp"
#include "seqssl/model/checkpoint.hpp"
#include "seqssl/train/sweep.hpp"

namespace seqssl {

struct EvalResult {
  double accuracy = 0.0;
  std::array<std::array<int64_t, 9>, 9> confusion{};  // rows = true, cols = predicted
  std::array<std::optional<double>, 9> per_class_recall{};  // null when class absent
  int64_t n_samples = 0;

  std::string to_json() const;  // pretty-printed, deterministic field order
};

// Slice-level evaluation of a finetuned checkpoint on labeled slices.
// Argmax ties break to the lowest class index.
EvalResult evaluate(const Checkpoint& checkpoint, const std::vector<LabeledSlice>& test_slices,
                    int resolution);

// Confusion statistics from already-computed predictions (also the unit the
// toy-enumeration tests check).
EvalResult tally_predictions(const std::vector<int>& truth, const std::vector<int>& predicted);

// Optional study-level metric: majority vote of slice predictions per study
// (vote ties to the lowest class index), accuracy over studies. The primary
// metric everywhere else is slice-level.
double study_majority_accuracy(const Checkpoint& checkpoint,
                               const std::vector<LabeledSlice>& test_slices, int resolution);

// Tables-shaped emission: rows = fraction labels, columns = batch or
// batch_resolution codes, values at three decimals, "-" for failed or
// missing cells. Byte-deterministic for identical grids.
enum class TableFormat { kCsv, kMarkdown };
std::string render_table(const RunGrid& grid, TableFormat format);
void emit_table(const RunGrid& grid, TableFormat format, const std::string& path);

enum class ProjectionMethod : int { kPca = 0, kTsne };

const char* to_string(ProjectionMethod m);
ProjectionMethod projection_method_from_string(const std::string& s);

struct EmbeddingSet {
  Matrix vectors;                 // (M, embed_dim)
  std::vector<int> labels;        // class indices, for coloring only
  Matrix coords2d;                // empty until project_2d
  ProjectionMethod method = ProjectionMethod::kPca;
};

// Eval-mode backbone embeddings for each slice, any checkpoint stage.
EmbeddingSet extract_embeddings(const Checkpoint& checkpoint,
                                const std::vector<LabeledSlice>& slices, int resolution);
EmbeddingSet extract_embeddings(Model& model, const std::vector<LabeledSlice>& slices,
                                int resolution);

// Mean silhouette over all points, Euclidean distance; singleton clusters
// contribute 0. Requires at least two distinct labels.
double silhouette_score(const Matrix& vectors, const std::vector<int>& labels);

}  // namespace seqssl
