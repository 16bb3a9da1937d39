// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <fmt/core.h>

#include "rootnet/errors.hpp"

namespace rootnet {

namespace fs = std::filesystem;

namespace {

constexpr char kRawMagic[8] = {'R', 'N', 'L', 'A', 'B', 'E', 'L', '1'};
constexpr char kPngMagic[8] = {'\x89', 'P', 'N', 'G', '\r', '\n', '\x1a', '\n'};

double srgb_to_linear(double c) {
  c /= 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

std::array<double, 3> pixel_rgb(const Image& image, std::int64_t y, std::int64_t x) {
  if (image.channels == 1) {
    double v = image.at(y, x);
    return {v, v, v};
  }
  return {double(image.at(y, x, 0)), double(image.at(y, x, 1)), double(image.at(y, x, 2))};
}

struct Center {
  double l, a, b, x, y;
};

std::int64_t find_root(std::vector<std::int64_t>& parent, std::int64_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

void SlicParams::validate() const {
  if (target_size < 4) throw ConfigError(fmt::format("slic target_size must be >= 4, got {}", target_size));
  if (!(compactness >= 0.0) || !std::isfinite(compactness))
    throw ConfigError("slic compactness must be finite and non-negative");
  if (iterations < 1) throw ConfigError("slic iterations must be >= 1");
}

std::array<double, 3> rgb_to_lab(double r, double g, double b) {
  double lr = srgb_to_linear(r), lg = srgb_to_linear(g), lb = srgb_to_linear(b);
  double x = (0.4124564 * lr + 0.3575761 * lg + 0.1804375 * lb) / 0.95047;
  double y = 0.2126729 * lr + 0.7151522 * lg + 0.0721750 * lb;
  double z = (0.0193339 * lr + 0.1191920 * lg + 0.9503041 * lb) / 1.08883;
  double fx = lab_f(x), fy = lab_f(y), fz = lab_f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

SuperpixelMap make_superpixel_map(std::int64_t height, std::int64_t width,
                                  const std::vector<std::int32_t>& labels) {
  if (height < 0 || width < 0 || labels.size() != static_cast<std::size_t>(height * width))
    throw ShapeError(fmt::format("label raster of {} values does not match {}x{}", labels.size(),
                                 height, width));
  SuperpixelMap map;
  map.height = height;
  map.width = width;
  map.labels.resize(labels.size());
  std::unordered_map<std::int32_t, std::int32_t> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<std::int32_t>(remap.size()));
    map.labels[i] = it->second;
  }
  map.count = static_cast<std::int32_t>(remap.size());
  map.stats.assign(static_cast<std::size_t>(map.count), {});
  for (std::int64_t y = 0; y < height; ++y)
    for (std::int64_t x = 0; x < width; ++x) {
      auto& s = map.stats[static_cast<std::size_t>(map.at(y, x))];
      ++s.pixels;
      s.cx += x + 0.5;
      s.cy += y + 0.5;
    }
  for (auto& s : map.stats) {
    s.cx /= double(s.pixels);
    s.cy /= double(s.pixels);
  }
  return map;
}

void attach_colors(SuperpixelMap& map, const Image& image) {
  if (image.height != map.height || image.width != map.width)
    throw ShapeError(fmt::format("image {}x{} does not match label map {}x{}", image.height,
                                 image.width, map.height, map.width));
  for (auto& s : map.stats) s.color = {};
  for (std::int64_t y = 0; y < map.height; ++y)
    for (std::int64_t x = 0; x < map.width; ++x) {
      auto c = pixel_rgb(image, y, x);
      auto& s = map.stats[static_cast<std::size_t>(map.at(y, x))];
      for (int k = 0; k < 3; ++k) s.color[k] += c[k];
    }
  for (auto& s : map.stats)
    for (auto& c : s.color) c /= double(s.pixels);
}

SuperpixelMap slic(const Image& image, const SlicParams& params) {
  params.validate();
  if (image.channels != 1 && image.channels != 3)
    throw ValidationError(fmt::format("slic needs 1 or 3 channels, got {}", image.channels));
  const std::int64_t h = image.height, w = image.width;
  if (h <= 0 || w <= 0) throw ValidationError("slic on an empty image");
  const std::size_t n = image.pixels();

  std::vector<std::array<double, 3>> lab(n);
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      auto c = pixel_rgb(image, y, x);
      lab[static_cast<std::size_t>(y * w + x)] = rgb_to_lab(c[0], c[1], c[2]);
    }
  auto lab_at = [&](std::int64_t y, std::int64_t x) -> const std::array<double, 3>& {
    return lab[static_cast<std::size_t>(y * w + x)];
  };

  const double s = std::sqrt(double(params.target_size));
  const std::int64_t nx = std::max<std::int64_t>(1, std::llround(double(w) / s));
  const std::int64_t ny = std::max<std::int64_t>(1, std::llround(double(h) / s));
  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx * ny));
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      double cx = (i + 0.5) * double(w) / double(nx);
      double cy = (j + 0.5) * double(h) / double(ny);
      auto px = std::clamp<std::int64_t>(std::int64_t(cx), 0, w - 1);
      auto py = std::clamp<std::int64_t>(std::int64_t(cy), 0, h - 1);
      auto grad = [&](std::int64_t y, std::int64_t x) {
        if (x <= 0 || y <= 0 || x >= w - 1 || y >= h - 1) return std::numeric_limits<double>::infinity();
        double g = 0.0;
        for (int k = 0; k < 3; ++k) {
          double dx = lab_at(y, x + 1)[k] - lab_at(y, x - 1)[k];
          double dy = lab_at(y + 1, x)[k] - lab_at(y - 1, x)[k];
          g += dx * dx + dy * dy;
        }
        return g;
      };
      double best = grad(py, px);
      std::int64_t by = py, bx = px;
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          double g = grad(py + dy, px + dx);
          if (g < best) {
            best = g;
            by = py + dy;
            bx = px + dx;
          }
        }
      if (by != py || bx != px) {
        cx = bx + 0.5;
        cy = by + 0.5;
      }
      const auto& c = lab_at(std::clamp<std::int64_t>(std::int64_t(cy), 0, h - 1),
                             std::clamp<std::int64_t>(std::int64_t(cx), 0, w - 1));
      centers.push_back({c[0], c[1], c[2], cx, cy});
    }

  const double spatial = params.compactness / s;
  std::vector<std::int32_t> label(n, -1);
  std::vector<double> dist(n);
  for (int it = 0; it < params.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(label.begin(), label.end(), -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& c = centers[k];
      auto y0 = std::max<std::int64_t>(0, std::int64_t(std::floor(c.y - s)));
      auto y1 = std::min<std::int64_t>(h, std::int64_t(std::ceil(c.y + s)));
      auto x0 = std::max<std::int64_t>(0, std::int64_t(std::floor(c.x - s)));
      auto x1 = std::min<std::int64_t>(w, std::int64_t(std::ceil(c.x + s)));
      for (std::int64_t y = y0; y < y1; ++y)
        for (std::int64_t x = x0; x < x1; ++x) {
          const auto& p = lab_at(y, x);
          double dl = p[0] - c.l, da = p[1] - c.a, db = p[2] - c.b;
          double ddx = x + 0.5 - c.x, ddy = y + 0.5 - c.y;
          double d = std::sqrt(dl * dl + da * da + db * db) +
                     spatial * std::sqrt(ddx * ddx + ddy * ddy);
          auto i = static_cast<std::size_t>(y * w + x);
          if (d < dist[i]) {
            dist[i] = d;
            label[i] = static_cast<std::int32_t>(k);
          }
        }
    }
    std::vector<std::array<double, 6>> acc(centers.size(), std::array<double, 6>{});
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x) {
        auto i = static_cast<std::size_t>(y * w + x);
        if (label[i] < 0) continue;
        auto& a = acc[static_cast<std::size_t>(label[i])];
        a[0] += lab[i][0];
        a[1] += lab[i][1];
        a[2] += lab[i][2];
        a[3] += x + 0.5;
        a[4] += y + 0.5;
        a[5] += 1.0;
      }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const auto& a = acc[k];
      if (a[5] == 0.0) continue;
      centers[k] = {a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]};
    }
  }

  SuperpixelMap raw;
  raw.height = h;
  raw.width = w;
  raw.labels = std::move(label);
  auto out = enforce_connectivity(raw, params.target_size / 4);
  attach_colors(out, image);
  return out;
}

SuperpixelMap enforce_connectivity(const SuperpixelMap& map, std::int64_t min_size) {
  const std::int64_t h = map.height, w = map.width;
  const std::size_t n = static_cast<std::size_t>(h * w);
  if (map.labels.size() != n)
    throw ShapeError(fmt::format("label raster of {} values does not match {}x{}", map.labels.size(),
                                 h, w));
  std::vector<std::int64_t> comp(n, -1);
  std::vector<std::int64_t> size;
  std::vector<std::int64_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    auto id = static_cast<std::int64_t>(size.size());
    std::int64_t count = 0;
    comp[start] = id;
    stack.push_back(static_cast<std::int64_t>(start));
    while (!stack.empty()) {
      auto i = stack.back();
      stack.pop_back();
      ++count;
      std::int64_t y = i / w, x = i % w;
      const std::int64_t nb[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= h || q[1] < 0 || q[1] >= w) continue;
        auto j = static_cast<std::size_t>(q[0] * w + q[1]);
        if (comp[j] < 0 && map.labels[j] == map.labels[static_cast<std::size_t>(i)]) {
          comp[j] = id;
          stack.push_back(static_cast<std::int64_t>(j));
        }
      }
    }
    size.push_back(count);
  }

  const auto ncomp = static_cast<std::int64_t>(size.size());
  std::vector<std::vector<std::int64_t>> adjacent(static_cast<std::size_t>(ncomp));
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      auto a = comp[static_cast<std::size_t>(y * w + x)];
      if (x + 1 < w) {
        auto b = comp[static_cast<std::size_t>(y * w + x + 1)];
        if (a != b) {
          adjacent[a].push_back(b);
          adjacent[b].push_back(a);
        }
      }
      if (y + 1 < h) {
        auto b = comp[static_cast<std::size_t>((y + 1) * w + x)];
        if (a != b) {
          adjacent[a].push_back(b);
          adjacent[b].push_back(a);
        }
      }
    }

  std::vector<std::int64_t> parent(static_cast<std::size_t>(ncomp));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::int64_t> merged = size;
  for (std::int64_t c = 0; c < ncomp; ++c) {
    auto rc = find_root(parent, c);
    if (merged[rc] >= min_size) continue;
    std::int64_t best = -1;
    for (auto nbc : adjacent[rc]) {
      auto r = find_root(parent, nbc);
      if (r == rc) continue;
      if (best < 0 || merged[r] > merged[best] || (merged[r] == merged[best] && r < best)) best = r;
    }
    if (best < 0) continue;
    parent[rc] = best;
    merged[best] += merged[rc];
    adjacent[best].insert(adjacent[best].end(), adjacent[rc].begin(), adjacent[rc].end());
    adjacent[rc].clear();
  }

  std::vector<std::int32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<std::int32_t>(find_root(parent, comp[i]));
  return make_superpixel_map(h, w, labels);
}

Image snap_mask(const Image& mask, const SuperpixelMap& map) {
  if (mask.channels != 1 || mask.height != map.height || mask.width != map.width)
    throw ShapeError(fmt::format("mask {}x{}x{} does not match label map {}x{}", mask.height,
                                 mask.width, mask.channels, map.height, map.width));
  std::vector<std::int64_t> root(static_cast<std::size_t>(map.count), 0);
  std::vector<std::int64_t> total(static_cast<std::size_t>(map.count), 0);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    auto id = static_cast<std::size_t>(map.labels[i]);
    ++total[id];
    if (mask.data[i] != 0) ++root[id];
  }
  Image out(map.height, map.width, 1);
  for (std::size_t i = 0; i < map.labels.size(); ++i) {
    auto id = static_cast<std::size_t>(map.labels[i]);
    out.data[i] = 2 * root[id] >= total[id] ? 1 : 0;
  }
  return out;
}

void save_label_map_raw(const fs::path& path, const SuperpixelMap& map) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
  f.write(kRawMagic, 8);
  auto put = [&](std::uint64_t v, int bytes) {
    char b[8];
    for (int i = 0; i < bytes; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    f.write(b, bytes);
  };
  put(static_cast<std::uint64_t>(map.height), 8);
  put(static_cast<std::uint64_t>(map.width), 8);
  for (auto l : map.labels) put(static_cast<std::uint32_t>(l), 4);
  if (!f) throw IoError(fmt::format("cannot write {}", path.string()));
}

fs::path save_label_map(const fs::path& path, const SuperpixelMap& map) {
  if (map.count > 65535) {
    fs::path raw = path;
    raw.replace_extension(".rnlabels");
    save_label_map_raw(raw, map);
    return raw;
  }
  std::vector<std::uint16_t> values(map.labels.begin(), map.labels.end());
  write_png16(path, map.height, map.width, values);
  return path;
}

SuperpixelMap load_label_map(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open {}", path.string()));
  char magic[8] = {};
  f.read(magic, 8);
  if (f.gcount() == 8 && std::memcmp(magic, kPngMagic, 8) == 0) {
    f.close();
    std::int64_t h = 0, w = 0;
    auto values = read_png16(path, h, w);
    return make_superpixel_map(h, w, std::vector<std::int32_t>(values.begin(), values.end()));
  }
  if (f.gcount() != 8 || std::memcmp(magic, kRawMagic, 8) != 0)
    throw FormatError(fmt::format("{} is not a label map", path.string()));
  auto get = [&](int bytes) {
    unsigned char b[8] = {};
    f.read(reinterpret_cast<char*>(b), bytes);
    if (f.gcount() != bytes) throw TruncatedError(fmt::format("{} is truncated", path.string()));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
  };
  auto h = static_cast<std::int64_t>(get(8));
  auto w = static_cast<std::int64_t>(get(8));
  if (h < 0 || w < 0 || (w > 0 && h > (std::int64_t(1) << 40) / w))
    throw FormatError(fmt::format("{} has an implausible size {}x{}", path.string(), h, w));
  std::vector<std::int32_t> labels(static_cast<std::size_t>(h * w));
  for (auto& l : labels) l = static_cast<std::int32_t>(get(4));
  return make_superpixel_map(h, w, labels);
}

}  // namespace rootnet
