#include "seqssl/report/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "seqssl/data/volume.hpp"

namespace seqssl {

Rgb class_color(int class_index) {
  // fixed 9-class palette
  static constexpr Rgb kPalette[9] = {
      {31, 119, 180},   // T1
      {255, 127, 14},   // T2
      {44, 160, 44},    // FLAIR
      {214, 39, 40},    // TOF
      {148, 103, 189},  // TraceW
      {140, 86, 75},    // DWI
      {227, 119, 194},  // ADC
      {127, 127, 127},  // GRE
      {188, 189, 34},   // Perfusion
  };
  require(class_index >= 0 && class_index < 9, "plot: class index out of range");
  return kPalette[class_index];
}

// ------------------------------------------------------------------- PNG --

namespace {

uint32_t crc32_of(const uint8_t* data, size_t len, uint32_t crc = 0xffffffffu) {
  static uint32_t table[256];
  static bool table_ready = false;
  if (!table_ready) {
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    table_ready = true;
  }
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
  return crc;
}

void push_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void push_chunk(std::vector<uint8_t>& out, const char type[4],
                const std::vector<uint8_t>& payload) {
  push_u32_be(out, static_cast<uint32_t>(payload.size()));
  std::vector<uint8_t> body(type, type + 4);
  body.insert(body.end(), payload.begin(), payload.end());
  out.insert(out.end(), body.begin(), body.end());
  push_u32_be(out, crc32_of(body.data(), body.size()) ^ 0xffffffffu);
}

// zlib stream with stored (uncompressed) deflate blocks
std::vector<uint8_t> zlib_store(const std::vector<uint8_t>& raw) {
  std::vector<uint8_t> out;
  out.push_back(0x78);
  out.push_back(0x01);
  size_t pos = 0;
  while (pos < raw.size()) {
    const size_t n = std::min<size_t>(65535, raw.size() - pos);
    const bool final = pos + n == raw.size();
    out.push_back(final ? 1 : 0);
    out.push_back(static_cast<uint8_t>(n & 0xff));
    out.push_back(static_cast<uint8_t>(n >> 8));
    out.push_back(static_cast<uint8_t>(~n & 0xff));
    out.push_back(static_cast<uint8_t>((~n >> 8) & 0xff));
    out.insert(out.end(), raw.begin() + pos, raw.begin() + pos + n);
    pos += n;
  }
  uint32_t a = 1, b = 0;
  for (uint8_t byte : raw) {
    a = (a + byte) % 65521;
    b = (b + a) % 65521;
  }
  push_u32_be(out, (b << 16) | a);
  return out;
}

}  // namespace

void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<uint8_t>& rgb) {
  require(width >= 1 && height >= 1, "png: empty image");
  require(rgb.size() == static_cast<size_t>(width) * height * 3, "png: buffer size mismatch");

  std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<uint8_t> ihdr;
  push_u32_be(ihdr, static_cast<uint32_t>(width));
  push_u32_be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  push_chunk(out, "IHDR", ihdr);

  std::vector<uint8_t> raw;
  raw.reserve(static_cast<size_t>(height) * (1 + static_cast<size_t>(width) * 3));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    const uint8_t* row = rgb.data() + static_cast<size_t>(y) * width * 3;
    raw.insert(raw.end(), row, row + static_cast<size_t>(width) * 3);
  }
  push_chunk(out, "IDAT", zlib_store(raw));
  push_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  require(f.good(), "png: cannot open '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

// ---------------------------------------------------------------- scatter --

namespace {

struct Extent {
  float min_x, max_x, min_y, max_y;
};

Extent coord_extent(const Matrix& coords) {
  Extent e{coords.at(0, 0), coords.at(0, 0), coords.at(0, 1), coords.at(0, 1)};
  for (int i = 0; i < coords.rows; ++i) {
    e.min_x = std::min(e.min_x, coords.at(i, 0));
    e.max_x = std::max(e.max_x, coords.at(i, 0));
    e.min_y = std::min(e.min_y, coords.at(i, 1));
    e.max_y = std::max(e.max_y, coords.at(i, 1));
  }
  if (e.max_x == e.min_x) e.max_x = e.min_x + 1.0f;
  if (e.max_y == e.min_y) e.max_y = e.min_y + 1.0f;
  return e;
}

constexpr int kWidth = 880;
constexpr int kHeight = 660;
constexpr int kMargin = 40;
constexpr int kLegendWidth = 150;

}  // namespace

void render_plot(const EmbeddingSet& set, const std::string& path_base) {
  require(set.coords2d.rows == static_cast<int>(set.labels.size()) && set.coords2d.rows > 0,
          "render_plot: projected coordinates required (run project_2d first)");
  const Extent e = coord_extent(set.coords2d);
  const int plot_w = kWidth - kLegendWidth - 2 * kMargin;
  const int plot_h = kHeight - 2 * kMargin;
  auto px = [&](int i) {
    return kMargin + (set.coords2d.at(i, 0) - e.min_x) / (e.max_x - e.min_x) * plot_w;
  };
  auto py = [&](int i) {
    return kMargin + (1.0f - (set.coords2d.at(i, 1) - e.min_y) / (e.max_y - e.min_y)) * plot_h;
  };

  // SVG
  {
    std::ofstream svg(path_base + ".svg", std::ios::binary);
    require(svg.good(), "render_plot: cannot open '" + path_base + ".svg'");
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    char buf[160];
    for (int i = 0; i < set.coords2d.rows; ++i) {
      const Rgb c = class_color(set.labels[i]);
      std::snprintf(buf, sizeof(buf),
                    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"rgb(%d,%d,%d)\"/>\n",
                    px(i), py(i), c.r, c.g, c.b);
      svg << buf;
    }
    for (int c = 0; c < kNumClasses; ++c) {
      const Rgb col = class_color(c);
      const int ly = kMargin + 18 * c;
      const int lx = kWidth - kLegendWidth;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%d\" y=\"%d\" width=\"12\" height=\"12\" fill=\"rgb(%d,%d,%d)\"/>"
                    "<text x=\"%d\" y=\"%d\" font-size=\"12\" font-family=\"sans-serif\">%s"
                    "</text>\n",
                    lx, ly, col.r, col.g, col.b, lx + 16, ly + 10,
                    to_string(static_cast<SequenceLabel>(c)));
      svg << buf;
    }
    svg << "</svg>\n";
  }

  // PNG: white canvas, frame, 3x3 squares per point, legend swatches
  std::vector<uint8_t> img(static_cast<size_t>(kWidth) * kHeight * 3, 255);
  auto put = [&](int x, int y, Rgb c) {
    if (x < 0 || x >= kWidth || y < 0 || y >= kHeight) return;
    uint8_t* p = img.data() + (static_cast<size_t>(y) * kWidth + x) * 3;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  };
  const Rgb frame{68, 68, 68};
  for (int x = kMargin; x <= kMargin + plot_w; ++x) {
    put(x, kMargin, frame);
    put(x, kMargin + plot_h, frame);
  }
  for (int y = kMargin; y <= kMargin + plot_h; ++y) {
    put(kMargin, y, frame);
    put(kMargin + plot_w, y, frame);
  }
  for (int i = 0; i < set.coords2d.rows; ++i) {
    const Rgb c = class_color(set.labels[i]);
    const int cx = static_cast<int>(px(i));
    const int cy = static_cast<int>(py(i));
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) put(cx + dx, cy + dy, c);
  }
  for (int c = 0; c < kNumClasses; ++c) {
    const Rgb col = class_color(c);
    for (int dy = 0; dy < 12; ++dy)
      for (int dx = 0; dx < 12; ++dx)
        put(kWidth - kLegendWidth + dx, kMargin + 18 * c + dy, col);
  }
  write_png_rgb(path_base + ".png", kWidth, kHeight, img);
}

}  // namespace seqssl
