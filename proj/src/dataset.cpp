// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace rootnet {

namespace fs = std::filesystem;

void SampleRecord::validate() const {
  if (image.channels != 3) throw ValidationError("sample '" + id + "': image is not RGB");
  if (mask.channels != 1) throw ValidationError("sample '" + id + "': mask is not single-channel");
  if (image.height != mask.height || image.width != mask.width) {
    throw ValidationError("sample '" + id + "': image is " + std::to_string(image.height) + "x" +
                          std::to_string(image.width) + " but mask is " +
                          std::to_string(mask.height) + "x" + std::to_string(mask.width));
  }
  for (std::uint8_t v : mask.data)
    if (v > 1) throw ValidationError("sample '" + id + "': mask values must be 0 or 1");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

}  // namespace

SampleSet load_sample_set(const fs::path& dir) {
  const fs::path csv = dir / "strata.csv";
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,date,tube,depth") {
    throw FormatError(csv.string() + ": expected header 'id,date,tube,depth'");
  }
  SampleSet set;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4) {
      throw FormatError(csv.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    SampleRecord r;
    r.id = f[0];
    r.date = f[1];
    r.tube = f[2];
    r.depth = f[3];
    r.image = read_png(dir / "images" / (r.id + ".png"));
    if (r.image.channels != 3) {
      throw ValidationError("sample '" + r.id + "': image must be RGB");
    }
    r.mask = read_png(dir / "masks" / (r.id + ".png"));
    if (r.mask.channels != 1) {
      throw ValidationError("sample '" + r.id + "': mask must be grayscale");
    }
    for (auto& v : r.mask.data) {
      if (v != 0 && v != 255) {
        throw ValidationError("sample '" + r.id + "': mask values must be 0 or 255, found " +
                              std::to_string(v));
      }
      v = v ? 1 : 0;
    }
    r.validate();
    set.push_back(std::move(r));
  }
  if (set.empty()) throw ValidationError(csv.string() + " lists no samples");
  return set;
}

void save_sample_set(const fs::path& dir, const SampleSet& set) {
  std::error_code ec;
  fs::create_directories(dir / "images", ec);
  fs::create_directories(dir / "masks", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::ofstream csv(dir / "strata.csv", std::ios::binary);
  if (!csv) throw IoError("cannot write " + (dir / "strata.csv").string());
  csv << "id,date,tube,depth\n";
  for (const auto& r : set) {
    r.validate();
    write_png(dir / "images" / (r.id + ".png"), r.image);
    Image m = r.mask;
    for (auto& v : m.data) v = v ? 255 : 0;
    write_png(dir / "masks" / (r.id + ".png"), m);
    csv << r.id << ',' << r.date << ',' << r.tube << ',' << r.depth << '\n';
  }
  if (!csv) throw IoError("failed writing " + (dir / "strata.csv").string());
}

Split stratified_split(const SampleSet& samples, double train_frac, std::uint64_t seed) {
  if (samples.empty()) throw ValidationError("stratified_split: no samples");
  if (!(train_frac > 0.0 && train_frac <= 1.0)) {
    throw ValidationError("stratified_split: train fraction must lie in (0, 1]");
  }
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string k = samples[i].stratum();
    auto [it, fresh] = members.try_emplace(k);
    if (fresh) keys.push_back(k);
    it->second.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<char> to_train(samples.size(), 0);
  for (const auto& k : keys) {
    std::vector<std::size_t> idx = members[k];
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::ceil(train_frac * static_cast<double>(idx.size()) - 1e-9));
    for (std::size_t j = 0; j < n_train; ++j) to_train[idx[j]] = 1;
  }
  Split s;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (to_train[i] ? s.train : s.test).push_back(samples[i]);
  return s;
}

SampleSet tile_image(const SampleRecord& sample, int grid_rows, int grid_cols) {
  sample.validate();
  if (grid_rows < 1 || grid_cols < 1) throw ValidationError("tile grid must be at least 1x1");
  const std::int64_t h = sample.image.height, w = sample.image.width;
  if (h % grid_rows != 0 || w % grid_cols != 0) {
    throw ValidationError("cannot tile " + std::to_string(h) + "x" + std::to_string(w) +
                          " into a " + std::to_string(grid_rows) + "x" +
                          std::to_string(grid_cols) +
                          " grid; choose a grid whose rows divide the height and columns divide "
                          "the width");
  }
  const std::int64_t th = h / grid_rows, tw = w / grid_cols;
  SampleSet out;
  for (int r = 0; r < grid_rows; ++r)
    for (int c = 0; c < grid_cols; ++c) {
      SampleRecord t;
      t.id = grid_rows == 1 && grid_cols == 1
                 ? sample.id
                 : sample.id + "_r" + std::to_string(r) + "c" + std::to_string(c);
      t.date = sample.date;
      t.tube = sample.tube;
      t.depth = sample.depth;
      t.image = Image(th, tw, 3);
      t.mask = Image(th, tw, 1);
      for (std::int64_t y = 0; y < th; ++y) {
        const std::int64_t sy = r * th + y;
        const auto src = static_cast<std::size_t>(sy * w + c * tw);
        std::copy_n(sample.image.data.begin() + static_cast<std::ptrdiff_t>(src * 3), tw * 3,
                    &t.image.at(y, 0));
        std::copy_n(sample.mask.data.begin() + static_cast<std::ptrdiff_t>(src), tw,
                    &t.mask.at(y, 0));
      }
      out.push_back(std::move(t));
    }
  return out;
}

PosWeight compute_pos_weight(const std::vector<const Image*>& masks) {
  std::vector<double> ratios;
  PosWeight pw;
  for (const Image* m : masks) {
    std::size_t root = 0;
    for (std::uint8_t v : m->data) root += v ? 1 : 0;
    if (root == 0) {
      ++pw.excluded;
      continue;
    }
    ratios.push_back(static_cast<double>(m->data.size() - root) / static_cast<double>(root));
  }
  if (ratios.empty()) {
    throw ValidationError("compute_pos_weight: no mask contains root pixels; the ratio is undefined");
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  pw.value = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  pw.used = n;
  return pw;
}

PosWeight compute_pos_weight(const SampleSet& set) {
  std::vector<const Image*> masks;
  for (const auto& r : set) masks.push_back(&r.mask);
  return compute_pos_weight(masks);
}

void make_batch(const SampleSet& set, const std::vector<std::size_t>& order, std::size_t begin,
                std::size_t end, Tensor& input, Tensor& target) {
  const SampleRecord& first = set[order[begin]];
  const std::int64_t n = static_cast<std::int64_t>(end - begin);
  const std::int64_t h = first.image.height, w = first.image.width;
  input = Tensor(Shape{n, 3, h, w});
  target = Tensor(Shape{n, 1, h, w});
  const std::size_t plane = static_cast<std::size_t>(h * w);
  for (std::size_t k = begin; k < end; ++k) {
    const SampleRecord& r = set[order[k]];
    if (r.image.height != h || r.image.width != w) {
      throw ShapeError("batch mixes extents " + std::to_string(h) + "x" + std::to_string(w) +
                       " and " + std::to_string(r.image.height) + "x" +
                       std::to_string(r.image.width) + " (sample '" + r.id + "')");
    }
    const auto slot = static_cast<std::int64_t>(k - begin);
    image_into_batch(r.image, input, slot);
    float* t = target.raw() + static_cast<std::size_t>(slot) * plane;
    for (std::size_t i = 0; i < plane; ++i) t[i] = r.mask.data[i] ? 1.0f : 0.0f;
  }
}

}  // namespace rootnet
