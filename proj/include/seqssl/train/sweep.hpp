#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqssl/train/trainer.hpp"

namespace seqssl {

// One (label fraction x column) cell. Columns are batch sizes ("256") or
// batch_resolution codes ("64_84") when the resolution axis is active.
struct CellResult {
  std::string id;           // "<fraction-label>_<column>"
  std::string status;       // "done" | "failed"
  double accuracy = 0.0;
  std::string checkpoint;   // path of the column's pretrained checkpoint
  uint64_t seed = 0;
  std::string error;        // failure diagnostic, empty when done
};

// Accuracy grid shaped like the batch-size / resolution result tables:
// rows = label fractions, columns = batch or batch_resolution codes.
struct RunGrid {
  std::vector<double> fractions;
  std::vector<std::string> columns;
  std::map<std::string, CellResult> cells;  // key = cell id

  const CellResult* cell(size_t row, size_t col) const;
  void validate() const;  // accuracies in [0,1], axes nonempty
};

// "0.5%", "1%", "50%" — percent with one decimal only when needed.
std::string fraction_label(double fraction);
std::string cell_id(double fraction, const std::string& column);

struct SweepSpec {
  Framework framework = Framework::kSimsiam;
  std::vector<double> fractions = {0.005, 0.01, 0.05, 0.5, 1.0};
  std::vector<int> batch_sizes = {8, 16, 32};
  std::vector<int> resolutions;  // empty -> batch-only columns at base resolution
  int base_resolution = 84;
  int pretrain_epochs = 50;
  int finetune_epochs = 30;
  ModelSpec model;
  AugmentConfig augment;
  OptimSettings optim;
  uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
  std::vector<std::string> column_codes() const;
};

// Executes pretrain-once-per-column, finetune-per-fraction. Per-cell JSON
// state under <out_dir>/cells makes completed work resumable; a failing cell
// is recorded as failed and the grid continues. Columns run in parallel up
// to spec.jobs; cells within one column share its pretrained checkpoint.
RunGrid run_sweep(const SweepSpec& spec, const std::vector<LabeledSlice>& train,
                  const std::vector<LabeledSlice>& val, const std::vector<LabeledSlice>& test,
                  const std::string& out_dir);

void write_cell_state(const CellResult& cell, const std::string& cells_dir);
std::optional<CellResult> read_cell_state(const std::string& cells_dir, const std::string& id);

}  // namespace seqssl
