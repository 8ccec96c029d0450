#pragma once

#include <string>

#include "seqssl/report/report.hpp"

namespace seqssl {

// Scatter plot of projected embeddings colored by the fixed 9-class palette,
// with a legend. Writes "<path_base>.svg" and "<path_base>.png"; both
// encoders are in-repo and byte-deterministic.
void render_plot(const EmbeddingSet& set, const std::string& path_base);

// RGB triplet per class index, shared by both encoders.
struct Rgb {
  uint8_t r, g, b;
};
Rgb class_color(int class_index);

// Minimal PNG writer (8-bit RGB, stored deflate blocks).
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& rgb);

}  // namespace seqssl
