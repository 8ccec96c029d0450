#include "seqssl/report/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "seqssl/train/trainer.hpp"

namespace seqssl {

using nlohmann::json;

std::string EvalResult::to_json() const {
  json j;
  j["accuracy"] = accuracy;
  j["n_samples"] = n_samples;
  json conf = json::array();
  for (const auto& row : confusion) {
    conf.push_back(std::vector<int64_t>(row.begin(), row.end()));
  }
  j["confusion"] = conf;
  json recall = json::array();
  for (const auto& r : per_class_recall) {
    if (r.has_value()) {
      recall.push_back(*r);
    } else {
      recall.push_back(nullptr);
    }
  }
  j["per_class_recall"] = recall;
  return j.dump(2);
}

EvalResult tally_predictions(const std::vector<int>& truth, const std::vector<int>& predicted) {
  require(truth.size() == predicted.size(), "evaluate: truth/prediction size mismatch");
  require(!truth.empty(), "evaluate: empty prediction set");
  EvalResult res;
  res.n_samples = static_cast<int64_t>(truth.size());
  int64_t correct = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    require(truth[i] >= 0 && truth[i] < 9 && predicted[i] >= 0 && predicted[i] < 9,
            "evaluate: class index out of range");
    res.confusion[truth[i]][predicted[i]] += 1;
    correct += truth[i] == predicted[i] ? 1 : 0;
  }
  res.accuracy = static_cast<double>(correct) / static_cast<double>(res.n_samples);
  for (int c = 0; c < 9; ++c) {
    int64_t row_total = 0;
    for (int k = 0; k < 9; ++k) row_total += res.confusion[c][k];
    if (row_total > 0) {
      res.per_class_recall[c] = static_cast<double>(res.confusion[c][c]) /
                                static_cast<double>(row_total);
    }
  }
  return res;
}

EvalResult evaluate(const Checkpoint& checkpoint, const std::vector<LabeledSlice>& test_slices,
                    int resolution) {
  require(checkpoint.meta.stage == "finetuned", "evaluate: checkpoint stage must be 'finetuned'");
  require(!test_slices.empty(), "evaluate: test split must be nonempty");
  auto model = model_from_checkpoint(checkpoint);
  const auto at_res = at_resolution(test_slices, resolution);

  std::vector<int> truth, predicted;
  truth.reserve(at_res.size());
  predicted.reserve(at_res.size());
  constexpr int kBatch = 64;
  for (size_t start = 0; start < at_res.size(); start += kBatch) {
    const size_t stop = std::min(at_res.size(), start + kBatch);
    std::vector<const Image*> imgs;
    for (size_t i = start; i < stop; ++i) imgs.push_back(&at_res[i].pixels);
    const Matrix& embed = model->forward_embed(make_batch(imgs), false);
    const Matrix& logits = model->forward_classify(embed);
    for (size_t i = start; i < stop; ++i) {
      const int r = static_cast<int>(i - start);
      int best = 0;
      for (int k = 1; k < 9; ++k) {
        if (logits.at(r, k) > logits.at(r, best)) best = k;  // ties -> lowest index
      }
      truth.push_back(static_cast<int>(at_res[i].label));
      predicted.push_back(best);
    }
  }
  return tally_predictions(truth, predicted);
}

double study_majority_accuracy(const Checkpoint& checkpoint,
                               const std::vector<LabeledSlice>& test_slices, int resolution) {
  require(checkpoint.meta.stage == "finetuned",
          "study_majority_accuracy: checkpoint stage must be 'finetuned'");
  require(!test_slices.empty(), "study_majority_accuracy: test split must be nonempty");
  auto model = model_from_checkpoint(checkpoint);
  const auto at_res = at_resolution(test_slices, resolution);

  struct Tally {
    int truth = 0;
    std::array<int, 9> votes{};
  };
  std::map<std::string, Tally> by_study;
  constexpr int kBatch = 64;
  for (size_t start = 0; start < at_res.size(); start += kBatch) {
    const size_t stop = std::min(at_res.size(), start + kBatch);
    std::vector<const Image*> imgs;
    for (size_t i = start; i < stop; ++i) imgs.push_back(&at_res[i].pixels);
    const Tensor batch = make_batch(imgs);
    const Matrix& logits = model->forward_classify(model->forward_embed(batch, false));
    for (size_t i = start; i < stop; ++i) {
      const int r = static_cast<int>(i - start);
      int best = 0;
      for (int k = 1; k < 9; ++k) {
        if (logits.at(r, k) > logits.at(r, best)) best = k;
      }
      Tally& t = by_study[at_res[i].study_id];
      t.truth = static_cast<int>(at_res[i].label);
      t.votes[best] += 1;
    }
  }
  int correct = 0;
  for (const auto& [_, t] : by_study) {
    int winner = 0;
    for (int k = 1; k < 9; ++k) {
      if (t.votes[k] > t.votes[winner]) winner = k;  // ties -> lowest index
    }
    correct += winner == t.truth ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(by_study.size());
}

namespace {

std::string cell_text(const RunGrid& grid, size_t row, size_t col) {
  const CellResult* cell = grid.cell(row, col);
  if (cell == nullptr || cell->status != "done") return "-";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.3f", cell->accuracy);
  return buf;
}

}  // namespace

std::string render_table(const RunGrid& grid, TableFormat format) {
  grid.validate();
  std::string out;
  if (format == TableFormat::kCsv) {
    out += "fraction";
    for (const auto& c : grid.columns) out += "," + c;
    out += "\n";
    for (size_t r = 0; r < grid.fractions.size(); ++r) {
      out += fraction_label(grid.fractions[r]);
      for (size_t c = 0; c < grid.columns.size(); ++c) out += "," + cell_text(grid, r, c);
      out += "\n";
    }
    return out;
  }
  out += "| fraction |";
  for (const auto& c : grid.columns) out += " " + c + " |";
  out += "\n|---|";
  for (size_t c = 0; c < grid.columns.size(); ++c) out += "---|";
  out += "\n";
  for (size_t r = 0; r < grid.fractions.size(); ++r) {
    out += "| " + fraction_label(grid.fractions[r]) + " |";
    for (size_t c = 0; c < grid.columns.size(); ++c) out += " " + cell_text(grid, r, c) + " |";
    out += "\n";
  }
  return out;
}

void emit_table(const RunGrid& grid, TableFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "emit_table: cannot open '" + path + "'");
  out << render_table(grid, format);
}

const char* to_string(ProjectionMethod m) {
  switch (m) {
    case ProjectionMethod::kPca: return "pca";
    case ProjectionMethod::kTsne: return "tsne";
  }
  throw ValidationError("projection method: unknown enum value");
}

ProjectionMethod projection_method_from_string(const std::string& s) {
  if (s == "pca") return ProjectionMethod::kPca;
  if (s == "tsne") return ProjectionMethod::kTsne;
  throw ValidationError("embed.method: unknown method '" + s + "'");
}

EmbeddingSet extract_embeddings(Model& model, const std::vector<LabeledSlice>& slices,
                                int resolution) {
  require(!slices.empty(), "extract_embeddings: subset must be nonempty");
  const auto at_res = at_resolution(slices, resolution);
  EmbeddingSet set;
  set.vectors.resize(static_cast<int>(at_res.size()), model.spec().embed_dim());
  set.labels.reserve(at_res.size());
  constexpr int kBatch = 64;
  for (size_t start = 0; start < at_res.size(); start += kBatch) {
    const size_t stop = std::min(at_res.size(), start + kBatch);
    std::vector<const Image*> imgs;
    for (size_t i = start; i < stop; ++i) imgs.push_back(&at_res[i].pixels);
    const Matrix& embed = model.forward_embed(make_batch(imgs), false);
    for (size_t i = start; i < stop; ++i) {
      std::copy(embed.v.begin() + static_cast<ptrdiff_t>((i - start) * embed.cols),
                embed.v.begin() + static_cast<ptrdiff_t>((i - start + 1) * embed.cols),
                set.vectors.v.begin() + static_cast<ptrdiff_t>(i * embed.cols));
    }
  }
  for (const auto& s : at_res) set.labels.push_back(static_cast<int>(s.label));
  return set;
}

EmbeddingSet extract_embeddings(const Checkpoint& checkpoint,
                                const std::vector<LabeledSlice>& slices, int resolution) {
  auto model = model_from_checkpoint(checkpoint);
  return extract_embeddings(*model, slices, resolution);
}

double silhouette_score(const Matrix& vectors, const std::vector<int>& labels) {
  const int m = vectors.rows;
  require(m >= 2, "silhouette: need at least 2 points");
  require(labels.size() == static_cast<size_t>(m), "silhouette: labels mismatch");
  std::vector<int> counts(10, 0);
  int distinct = 0;
  for (int y : labels) {
    require(y >= 0 && y < 10, "silhouette: label out of range");
    if (counts[y]++ == 0) ++distinct;
  }
  require(distinct >= 2, "silhouette: need at least 2 clusters");

  double total = 0.0;
  std::vector<double> mean_dist(10, 0.0);
  for (int i = 0; i < m; ++i) {
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (int k = 0; k < vectors.cols; ++k) {
        const double d = vectors.at(i, k) - vectors.at(j, k);
        d2 += d * d;
      }
      mean_dist[labels[j]] += std::sqrt(d2);
    }
    const int own = labels[i];
    if (counts[own] <= 1) continue;  // singleton contributes 0
    const double a = mean_dist[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 10; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, mean_dist[c] / static_cast<double>(counts[c]));
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(m);
}

}  // namespace seqssl
