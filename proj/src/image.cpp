#include "ddcrp/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "png_io.hpp"

namespace ddcrp {
namespace fs = std::filesystem;

bool SuperpixelGraph::adjacent(int i, int j) const {
  const auto& adj = adjacency[static_cast<size_t>(i)];
  return std::binary_search(adj.begin(), adj.end(), j);
}

namespace {

std::string lower_ext(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  static constexpr unsigned char kPng[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return in.gcount() == 8 && std::equal(sig, sig + 8, kPng);
}

// Skips whitespace and '#' comments in a PNM header.
bool next_header_token(std::istream& in, long& value) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) return false;
  value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1'000'000'000) return false;
    c = in.get();
  }
  // exactly one whitespace byte separates the header from the raster
  return c != EOF && std::isspace(c);
}

ImageRGB read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("unreadable file: " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (in.gcount() != 2) throw IoError("unreadable file: " + path.string());
  if (magic[0] != 'P' || magic[1] != '6') throw IoError("unsupported format: " + path.string());
  long w = 0, h = 0, maxval = 0;
  if (!next_header_token(in, w) || !next_header_token(in, h) || !next_header_token(in, maxval)) {
    throw IoError("unreadable file: " + path.string() + " (bad PPM header)");
  }
  if (w == 0 || h == 0) throw IoError("zero-dimension image: " + path.string());
  if (maxval < 1 || maxval > 65535) throw IoError("unsupported format: PPM maxval " + std::to_string(maxval));
  const int bytes = maxval < 256 ? 1 : 2;
  const size_t n = static_cast<size_t>(w) * static_cast<size_t>(h);
  std::vector<unsigned char> raster(n * 3 * bytes);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (static_cast<size_t>(in.gcount()) != raster.size()) {
    throw IoError("unreadable file: " + path.string() + " (truncated raster)");
  }
  ImageRGB image(static_cast<int>(w), static_cast<int>(h));
  const double scale = 1.0 / static_cast<double>(maxval);
  for (size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const size_t k = (3 * i + c) * bytes;
      const unsigned v = bytes == 1 ? raster[k] : (raster[k] << 8) | raster[k + 1];
      image.pixels[i][c] = std::min(1.0, v * scale);
    }
  }
  return image;
}

}  // namespace

ImageRGB load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("unreadable file: " + path.string());
  if (has_png_signature(path)) return read_png_rgb(path);
  return read_ppm(path);
}

void save_ppm(const ImageRGB& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const auto& px : image.pixels) {
    for (double v : px) {
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
  }
  if (!out) throw IoError("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Label maps

int canonicalize_labels(LabelMap& map) {
  const int w = map.width;
  const int h = map.height;
  const size_t n = map.labels.size();
  std::vector<int> out(n, -1);
  std::vector<int> queue;
  queue.reserve(n);
  std::set<int> raw_ids;
  int next = 0;
  for (size_t start = 0; start < n; ++start) {
    if (out[start] >= 0) continue;
    const int raw = map.labels[start];
    raw_ids.insert(raw);
    out[start] = next;
    queue.clear();
    queue.push_back(static_cast<int>(start));
    for (size_t q = 0; q < queue.size(); ++q) {
      const int p = queue[q];
      const int x = p % w;
      const int y = p / w;
      const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbrs) {
        if (nb[0] < 0 || nb[1] < 0 || nb[0] >= w || nb[1] >= h) continue;
        const int np = nb[1] * w + nb[0];
        if (out[np] < 0 && map.labels[np] == raw) {
          out[np] = next;
          queue.push_back(np);
        }
      }
    }
    ++next;
  }
  map.labels = std::move(out);
  map.n_superpixels = next;
  return next - static_cast<int>(raw_ids.size());
}

namespace {

LabelMap read_label_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("unreadable file: " + path.string());
  LabelMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream row(line);
    std::string cell;
    int count = 0;
    while (std::getline(row, cell, ',')) {
      size_t used = 0;
      long v = 0;
      try {
        v = std::stol(cell, &used);
      } catch (const std::exception&) {
        throw IoError("unreadable file: " + path.string() + " (bad id at line " + std::to_string(line_no) + ")");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos || v < 0 ||
          v > std::numeric_limits<int>::max()) {
        throw IoError("unreadable file: " + path.string() + " (bad id at line " + std::to_string(line_no) + ")");
      }
      map.labels.push_back(static_cast<int>(v));
      ++count;
    }
    if (map.height == 0) {
      map.width = count;
    } else if (count != map.width) {
      throw IoError("unreadable file: " + path.string() + " (ragged row " + std::to_string(line_no) + ")");
    }
    ++map.height;
  }
  if (map.height == 0 || map.width == 0) throw IoError("unreadable file: " + path.string() + " (empty label map)");
  return map;
}

}  // namespace

LabelMap load_label_map(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError("unreadable file: " + path.string());
  LabelMap map;
  if (has_png_signature(path)) {
    const GrayImage16 gray = read_png_gray16(path);
    map.width = gray.width;
    map.height = gray.height;
    map.labels.assign(gray.values.begin(), gray.values.end());
  } else {
    map = read_label_csv(path);
  }
  const int splits = canonicalize_labels(map);
  if (splits > 0) {
    std::cerr << "warning: " << path.string() << ": " << splits
              << " non-connected superpixel fragment(s) split into separate ids\n";
  }
  return map;
}

LabelMap load_label_map(const fs::path& path, int expected_width, int expected_height) {
  LabelMap map = load_label_map(path);
  if (map.width != expected_width || map.height != expected_height) {
    throw IoError("label map " + path.string() + " is " + std::to_string(map.width) + "x" +
                  std::to_string(map.height) + ", image is " + std::to_string(expected_width) + "x" +
                  std::to_string(expected_height));
  }
  return map;
}

void save_label_map(const LabelMap& labels, const fs::path& path) {
  if (lower_ext(path) == ".png") {
    if (labels.n_superpixels > 65536) throw IoError("too many superpixels for a 16-bit PNG label map");
    GrayImage16 gray{labels.width, labels.height, {}};
    gray.values.assign(labels.labels.begin(), labels.labels.end());
    write_png_gray16(gray, path);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (int y = 0; y < labels.height; ++y) {
    for (int x = 0; x < labels.width; ++x) {
      if (x) out << ',';
      out << labels.at(x, y);
    }
    out << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Adjacency graph

SuperpixelGraph build_graph(const LabelMap& label_map) {
  const int n = label_map.n_superpixels;
  if (n <= 0 || label_map.labels.size() != static_cast<size_t>(label_map.width) * label_map.height) {
    throw std::invalid_argument("build_graph: invalid label map");
  }
  SuperpixelGraph g;
  g.n = n;
  g.adjacency.assign(n, {});
  g.pixel_count.assign(n, 0);
  std::vector<Vec2> sums(n, Vec2::Zero());
  for (int y = 0; y < label_map.height; ++y) {
    for (int x = 0; x < label_map.width; ++x) {
      const int a = label_map.at(x, y);
      if (a < 0 || a >= n) throw std::invalid_argument("build_graph: label out of range");
      ++g.pixel_count[a];
      sums[a] += Vec2(x, y);
      if (x + 1 < label_map.width) {
        const int b = label_map.at(x + 1, y);
        if (b != a) {
          g.adjacency[a].push_back(b);
          g.adjacency[b].push_back(a);
        }
      }
      if (y + 1 < label_map.height) {
        const int b = label_map.at(x, y + 1);
        if (b != a) {
          g.adjacency[a].push_back(b);
          g.adjacency[b].push_back(a);
        }
      }
    }
  }
  g.centroid.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& adj = g.adjacency[i];
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    if (g.pixel_count[i] == 0) throw std::invalid_argument("build_graph: unused superpixel id");
    g.centroid[i] = sums[i] / g.pixel_count[i];
  }
  return g;
}

}  // namespace ddcrp
