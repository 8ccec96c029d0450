#include "seqssl/train/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

namespace seqssl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fraction_label(double fraction) {
  const double pct = fraction * 100.0;
  char buf[32];
  if (std::fabs(pct - std::round(pct)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "%d%%", static_cast<int>(std::llround(pct)));
  } else {
    std::snprintf(buf, sizeof(buf), "%.1f%%", pct);
  }
  return buf;
}

std::string cell_id(double fraction, const std::string& column) {
  std::string label = fraction_label(fraction);
  label.pop_back();  // drop '%'
  return label + "_" + column;
}

const CellResult* RunGrid::cell(size_t row, size_t col) const {
  auto it = cells.find(cell_id(fractions.at(row), columns.at(col)));
  return it == cells.end() ? nullptr : &it->second;
}

void RunGrid::validate() const {
  require(!fractions.empty() && !columns.empty(), "run_grid: axes must be nonempty");
  for (const auto& [id, cell] : cells) {
    if (cell.status == "done") {
      require(cell.accuracy >= 0.0 && cell.accuracy <= 1.0,
              "run_grid: accuracy out of [0,1] in cell '" + id + "'");
    }
  }
}

void SweepSpec::validate() const {
  require(!fractions.empty(), "sweep.fractions: must be nonempty");
  require(!batch_sizes.empty(), "sweep.batch_sizes: must be nonempty");
  for (double f : fractions) {
    require(f > 0.0 && f <= 1.0, "sweep.fractions: values must be in (0, 1]");
  }
  for (int b : batch_sizes) require(b >= 2, "sweep.batch_sizes: values must be >= 2");
  for (int r : resolutions) {
    require(r >= kMinInputSize, "sweep.resolutions: values must be >= 32");
  }
  require(base_resolution >= kMinInputSize, "sweep.base_resolution: must be >= 32");
  require(pretrain_epochs >= 1, "sweep.pretrain_epochs: must be >= 1");
  require(finetune_epochs >= 1, "sweep.finetune_epochs: must be >= 1");
  require(jobs >= 1, "sweep.jobs: must be >= 1");
  model.validate();
  augment.validate();
  optim.validate();
}

std::vector<std::string> SweepSpec::column_codes() const {
  std::vector<std::string> codes;
  for (int b : batch_sizes) {
    if (resolutions.empty()) {
      codes.push_back(std::to_string(b));
    } else {
      for (int r : resolutions) codes.push_back(std::to_string(b) + "_" + std::to_string(r));
    }
  }
  return codes;
}

void write_cell_state(const CellResult& cell, const std::string& cells_dir) {
  fs::create_directories(cells_dir);
  json j;
  j["cell"] = cell.id;
  j["status"] = cell.status;
  j["accuracy"] = cell.accuracy;
  j["checkpoint"] = cell.checkpoint;
  j["seed"] = cell.seed;
  j["error"] = cell.error;
  const std::string path = (fs::path(cells_dir) / (cell.id + ".json")).string();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    require(out.good(), "sweep: cannot write cell state '" + tmp + "'");
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

std::optional<CellResult> read_cell_state(const std::string& cells_dir, const std::string& id) {
  const std::string path = (fs::path(cells_dir) / (id + ".json")).string();
  std::ifstream in(path);
  if (!in.good()) return std::nullopt;
  json j = json::parse(in);
  CellResult cell;
  cell.id = j.at("cell").get<std::string>();
  cell.status = j.at("status").get<std::string>();
  cell.accuracy = j.at("accuracy").get<double>();
  cell.checkpoint = j.at("checkpoint").get<std::string>();
  cell.seed = j.at("seed").get<uint64_t>();
  cell.error = j.value("error", "");
  return cell;
}

namespace {

struct ColumnTask {
  size_t col_index;
  int batch_size;
  int resolution;
  std::string code;
};

void run_column(const SweepSpec& spec, const ColumnTask& task,
                const std::vector<LabeledSlice>& train, const std::vector<LabeledSlice>& val,
                const std::vector<LabeledSlice>& test, const std::string& out_dir,
                RunGrid& grid, std::mutex& grid_mutex) {
  const std::string cells_dir = (fs::path(out_dir) / "cells").string();
  const std::string ckpt_path =
      (fs::path(out_dir) / ("pretrain_" + task.code + ".ckpt")).string();

  // Which cells still need work?
  bool all_done = true;
  for (double f : spec.fractions) {
    auto existing = read_cell_state(cells_dir, cell_id(f, task.code));
    if (!existing.has_value() || existing->status != "done") {
      all_done = false;
      break;
    }
  }

  std::optional<Checkpoint> column_ckpt;
  std::string column_error;
  if (!all_done) {
    try {
      if (fs::exists(ckpt_path)) {
        column_ckpt = Checkpoint::load(ckpt_path);
      } else {
        PretrainConfig pc;
        pc.framework = spec.framework;
        pc.epochs = spec.pretrain_epochs;
        pc.batch_size = task.batch_size;
        pc.resolution = task.resolution;
        pc.optim = spec.optim;
        pc.augment = spec.augment;
        pc.seed = mix64(spec.seed, task.col_index);
        PretrainResult pr = pretrain(pc, strip_labels(train), strip_labels(val), spec.model);
        pr.checkpoint.save(ckpt_path);
        write_loss_log(pr.log,
                       (fs::path(out_dir) / ("pretrain_" + task.code + "_loss.csv")).string());
        column_ckpt = std::move(pr.checkpoint);
      }
    } catch (const std::exception& e) {
      column_error = e.what();
    }
  }

  for (size_t row = 0; row < spec.fractions.size(); ++row) {
    const double fraction = spec.fractions[row];
    const std::string id = cell_id(fraction, task.code);
    auto existing = read_cell_state(cells_dir, id);
    if (existing.has_value() && existing->status == "done") {
      std::lock_guard<std::mutex> lock(grid_mutex);
      grid.cells[id] = *existing;
      continue;  // resumability: completed cells are skipped
    }

    CellResult cell;
    cell.id = id;
    cell.checkpoint = ckpt_path;
    cell.seed = mix64(spec.seed, task.col_index, row);
    if (!column_error.empty()) {
      cell.status = "failed";
      cell.error = "pretrain failed: " + column_error;
    } else {
      try {
        FinetuneConfig fc;
        fc.label_fraction = fraction;
        fc.from_checkpoint = true;
        fc.epochs = spec.finetune_epochs;
        fc.batch_size = std::min(task.batch_size, 64);
        fc.resolution = task.resolution;
        fc.optim = spec.optim;
        fc.augment = spec.augment;
        fc.seed = cell.seed;
        FinetuneResult fr = finetune(column_ckpt, fc, train, val, test, spec.model);
        cell.status = "done";
        cell.accuracy = fr.test_accuracy;
      } catch (const std::exception& e) {
        cell.status = "failed";
        cell.error = e.what();
      }
    }
    write_cell_state(cell, cells_dir);
    std::lock_guard<std::mutex> lock(grid_mutex);
    grid.cells[id] = cell;
  }
}

}  // namespace

RunGrid run_sweep(const SweepSpec& spec, const std::vector<LabeledSlice>& train,
                  const std::vector<LabeledSlice>& val, const std::vector<LabeledSlice>& test,
                  const std::string& out_dir) {
  spec.validate();
  fs::create_directories(out_dir);

  std::vector<ColumnTask> tasks;
  size_t col_index = 0;
  for (int b : spec.batch_sizes) {
    if (spec.resolutions.empty()) {
      tasks.push_back({col_index++, b, spec.base_resolution, std::to_string(b)});
    } else {
      for (int r : spec.resolutions) {
        tasks.push_back({col_index++, b, r, std::to_string(b) + "_" + std::to_string(r)});
      }
    }
  }

  RunGrid grid;
  grid.fractions = spec.fractions;
  grid.columns = spec.column_codes();

  std::mutex grid_mutex;
  const int jobs = std::min<int>(spec.jobs, static_cast<int>(tasks.size()));
  if (jobs <= 1) {
    for (const auto& task : tasks) {
      run_column(spec, task, train, val, test, out_dir, grid, grid_mutex);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        while (true) {
          const size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          run_column(spec, tasks[i], train, val, test, out_dir, grid, grid_mutex);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  grid.validate();
  return grid;
}

}  // namespace seqssl
