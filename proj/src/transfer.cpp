// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/transfer.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "rootnet/hash.hpp"
#include "rootnet/optim.hpp"

namespace rootnet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[8] = {'R', 'N', 'F', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::vector<char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

json spec_to_json(const ArchSpec& s) {
  return {{"variant", to_string(s.variant)},
          {"depth", s.depth},
          {"base_width", s.base_width},
          {"in_channels", s.in_channels},
          {"out_channels", s.out_channels}};
}

ArchSpec spec_from_json(const json& j) {
  ArchSpec s;
  s.variant = parse_variant(j.at("variant").get<std::string>());
  s.depth = j.at("depth").get<int>();
  s.base_width = j.at("base_width").get<int>();
  s.in_channels = j.at("in_channels").get<int>();
  s.out_channels = j.at("out_channels").get<int>();
  return s;
}

}  // namespace

void ClassifierSpec::validate() const {
  if (base_width < 1) throw ConfigError("classifier base_width must be positive");
  if (in_channels < 1) throw ConfigError("classifier in_channels must be positive");
  if (classes < 2) throw ConfigError("classifier needs at least 2 classes");
}

std::vector<char> serialize_checkpoint(const Checkpoint& c) {
  json header;
  header["version"] = kCheckpointVersion;
  if (c.kind == ModelKind::unet) {
    header["kind"] = "unet";
    header["spec"] = spec_to_json(c.spec);
  } else {
    header["kind"] = "classifier";
    header["spec"] = {{"base_width", c.classifier.base_width},
                      {"in_channels", c.classifier.in_channels},
                      {"classes", c.classifier.classes}};
  }
  json params = json::array();
  for (const auto& p : c.params) {
    const Shape s = p.tensor.shape();
    params.push_back({{"name", p.name}, {"shape", {s.n, s.c, s.h, s.w}}});
  }
  header["params"] = std::move(params);
  const std::string text = header.dump();

  std::vector<char> out(kMagic, kMagic + 8);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& p : c.params)
    for (float v : p.tensor.data()) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  put_u64(out, fnv1a(out.data(), out.size()));
  return out;
}

Checkpoint parse_checkpoint(const std::vector<char>& bytes, const std::string& origin) {
  if (bytes.size() < 8 || !std::equal(kMagic, kMagic + 7, bytes.begin())) {
    if (bytes.size() < 8 && std::equal(bytes.begin(), bytes.end(), kMagic)) {
      throw TruncatedError(origin + ": truncated inside the magic bytes");
    }
    throw FormatError(origin + ": not a rootnet checkpoint");
  }
  if (bytes[7] != kMagic[7]) {
    throw VersionError(origin + ": unsupported checkpoint format version '" + std::string(1, bytes[7]) +
                       "' (this build reads version 1)");
  }
  if (bytes.size() < 16) throw TruncatedError(origin + ": truncated before the header length");
  const std::uint64_t hlen = get_u64(bytes.data() + 8);
  if (hlen > bytes.size() - 16) throw TruncatedError(origin + ": truncated inside the header");
  json header;
  try {
    header = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
  } catch (const json::exception& e) {
    throw FormatError(origin + ": malformed header: " + e.what());
  }
  Checkpoint c;
  std::vector<std::pair<std::string, Shape>> layout;
  std::uint64_t floats = 0;
  try {
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw VersionError(origin + ": header version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const std::string kind = header.at("kind").get<std::string>();
    if (kind == "unet") {
      c.kind = ModelKind::unet;
      c.spec = spec_from_json(header.at("spec"));
    } else if (kind == "classifier") {
      c.kind = ModelKind::classifier;
      const json& s = header.at("spec");
      c.classifier.base_width = s.at("base_width").get<int>();
      c.classifier.in_channels = s.at("in_channels").get<int>();
      c.classifier.classes = s.at("classes").get<int>();
    } else {
      throw FormatError(origin + ": unknown model kind '" + kind + "'");
    }
    for (const auto& p : header.at("params")) {
      const auto dims = p.at("shape").get<std::vector<std::int64_t>>();
      if (dims.size() != 4 || std::any_of(dims.begin(), dims.end(), [](auto d) { return d < 1; })) {
        throw FormatError(origin + ": bad shape for '" + p.at("name").get<std::string>() + "'");
      }
      const Shape s{dims[0], dims[1], dims[2], dims[3]};
      floats += s.numel();
      layout.emplace_back(p.at("name").get<std::string>(), s);
    }
  } catch (const json::exception& e) {
    throw FormatError(origin + ": malformed header: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(origin + ": " + e.what());
  }
  const std::uint64_t expected = 16 + hlen + 4 * floats + 8;
  if (bytes.size() < expected) {
    throw TruncatedError(origin + ": truncated (" + std::to_string(bytes.size()) + " of " +
                         std::to_string(expected) + " bytes)");
  }
  if (bytes.size() > expected) throw FormatError(origin + ": trailing bytes after the checksum");
  const std::uint64_t stored = get_u64(bytes.data() + expected - 8);
  if (fnv1a(bytes.data(), expected - 8) != stored) {
    throw ChecksumError(origin + ": checksum mismatch, the file is corrupt");
  }
  const char* p = bytes.data() + 16 + hlen;
  std::vector<NamedParam> params;
  for (auto& [name, shape] : layout) {
    std::vector<float> v(shape.numel());
    for (auto& x : v) {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
      x = std::bit_cast<float>(bits);
      p += 4;
    }
    params.push_back({name, Tensor(shape, std::move(v))});
  }
  c.params = ParamSet(std::move(params));
  return c;
}

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes, path.string());
}

void save(const ParamSet& params, const ArchSpec& spec, const fs::path& path) {
  check_params(spec, params);
  Checkpoint c;
  c.kind = ModelKind::unet;
  c.spec = spec;
  c.params = params;
  save_checkpoint(path, c);
}

std::pair<ArchSpec, ParamSet> load(const fs::path& path) {
  Checkpoint c = load_checkpoint(path);
  if (c.kind != ModelKind::unet) {
    throw FormatError(path.string() + " holds a classifier, not a segmentation model");
  }
  check_params(c.spec, c.params);
  return {c.spec, std::move(c.params)};
}

ParamSet load_into(const fs::path& path, const ArchSpec& expected) {
  auto [spec, params] = load(path);
  check_params(expected, params);
  return std::move(params);
}

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::scratch: return "scratch";
    case InitKind::encoder_from_classifier: return "encoder_from_classifier";
    case InitKind::encoder_from_checkpoint: return "encoder_from_checkpoint";
    case InitKind::encoder_decoder_from_checkpoint: return "encoder_decoder_from_checkpoint";
  }
  return "?";
}

std::string regime_label(InitKind kind) {
  switch (kind) {
    case InitKind::scratch: return "S";
    case InitKind::encoder_from_classifier: return "I";
    case InitKind::encoder_from_checkpoint: return "P-En";
    case InitKind::encoder_decoder_from_checkpoint: return "P-EnDe";
  }
  return "?";
}

InitKind parse_init_kind(std::string_view text) {
  for (InitKind k : {InitKind::scratch, InitKind::encoder_from_classifier, InitKind::encoder_from_checkpoint,
                     InitKind::encoder_decoder_from_checkpoint})
    if (text == to_string(k)) return k;
  throw ConfigError("unknown init_mode '" + std::string(text) +
                    "' (expected scratch, encoder_from_classifier, encoder_from_checkpoint or "
                    "encoder_decoder_from_checkpoint)");
}

std::vector<std::pair<std::string, Shape>> classifier_layout(const ClassifierSpec& spec) {
  spec.validate();
  const int b = spec.base_width;
  const int widths[10] = {b, b, 2 * b, 2 * b, 4 * b, 4 * b, 8 * b, 8 * b, 8 * b, 8 * b};
  std::vector<std::pair<std::string, Shape>> out;
  int c = spec.in_channels;
  for (int k = 0; k < 10; ++k) {
    const std::string p = "features." + std::to_string(k);
    out.emplace_back(p + ".weight", Shape{widths[k], c, 3, 3});
    out.emplace_back(p + ".bias", Shape{widths[k], 1, 1, 1});
    c = widths[k];
  }
  out.emplace_back("classifier.weight", Shape{spec.classes, c, 1, 1});
  out.emplace_back("classifier.bias", Shape{spec.classes, 1, 1, 1});
  return out;
}

ParamSet build_classifier(const ClassifierSpec& spec, std::uint64_t seed) {
  std::vector<NamedParam> params;
  for (auto& [name, shape] : classifier_layout(spec)) {
    NamedParam p{name, Tensor(shape)};
    init_param(p, seed);
    params.push_back(std::move(p));
  }
  return ParamSet(std::move(params));
}

std::vector<NamedParam> map_classifier_weights(const Checkpoint& classifier, const ArchSpec& target) {
  if (classifier.kind != ModelKind::classifier) {
    throw FormatError("map_classifier_weights: source is not a classifier checkpoint");
  }
  std::vector<const NamedParam*> convs;
  for (const auto& p : classifier.params)
    if (p.name.starts_with("features.")) convs.push_back(&p);
  std::vector<std::pair<std::string, Shape>> wanted;
  for (const auto& [name, shape] : param_layout(target))
    if (name.starts_with("enc")) wanted.emplace_back(name, shape);

  bool ok = convs.size() == wanted.size();
  for (std::size_t i = 0; ok && i < wanted.size(); ++i) ok = convs[i]->tensor.shape() == wanted[i].second;
  if (!ok) {
    std::string msg = "classifier convolution schedule does not match the encoder (expected " +
                      std::to_string(wanted.size()) + " tensors, found " + std::to_string(convs.size()) + "):";
    for (std::size_t i = 0; i < std::max(wanted.size(), convs.size()); ++i) {
      msg += "\n  " + (i < wanted.size() ? wanted[i].first + " " + to_string(wanted[i].second) : std::string("-"));
      msg += " <- " + (i < convs.size() ? convs[i]->name + " " + to_string(convs[i]->tensor.shape()) : std::string("-"));
    }
    throw ShapeError(msg);
  }
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < wanted.size(); ++i) out.push_back({wanted[i].first, convs[i]->tensor});
  return out;
}

InitResult init_model(const ArchSpec& spec, InitKind kind, const Checkpoint* source, std::uint64_t seed) {
  InitResult r;
  r.params = build(spec, seed);
  for (const auto& p : r.params) r.provenance[p.name] = Provenance::random;
  if (kind == InitKind::scratch) return r;
  if (!source) throw ConfigError("init_mode " + to_string(kind) + " needs a source checkpoint");

  auto copy = [&](const std::string& name, const Tensor& value) {
    NamedParam* dst = r.params.find(name);
    if (dst->tensor.shape() != value.shape()) {
      throw ShapeError("source parameter '" + name + "' has shape " + to_string(value.shape()) +
                       ", the target expects " + to_string(dst->tensor.shape()));
    }
    dst->tensor = value;
    dst->tensor.clear_grad();
    r.provenance[name] = Provenance::copied;
  };

  if (kind == InitKind::encoder_from_classifier) {
    for (const auto& p : map_classifier_weights(*source, spec)) copy(p.name, p.tensor);
    return r;
  }
  if (source->kind != ModelKind::unet) {
    throw FormatError("init_mode " + to_string(kind) + " needs a segmentation checkpoint");
  }
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    const std::string name = r.params[i].name;
    const Partition part = partition(name);
    const bool take = part == Partition::encoder ||
                      (part == Partition::decoder && kind == InitKind::encoder_decoder_from_checkpoint);
    if (!take) continue;
    const NamedParam* src = source->params.find(name);
    if (!src) throw FormatError("source checkpoint lacks parameter '" + name + "'");
    copy(name, src->tensor);
  }
  return r;
}

InitResult init_model(const ArchSpec& spec, const InitMode& mode, std::uint64_t seed) {
  if (mode.kind == InitKind::scratch) return init_model(spec, mode.kind, nullptr, seed);
  if (mode.source.empty()) throw ConfigError("init_mode " + to_string(mode.kind) + " needs a source path");
  const Checkpoint c = load_checkpoint(mode.source);
  return init_model(spec, mode.kind, &c, seed);
}

namespace {

Tensor patch_batch(const std::vector<LabeledPatch>& patches, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end, std::vector<int>& labels) {
  const Image& first = patches[order[begin]].image;
  Tensor t(Shape{static_cast<std::int64_t>(end - begin), 3, first.height, first.width});
  labels.clear();
  for (std::size_t k = begin; k < end; ++k) {
    image_into_batch(patches[order[k]].image, t, static_cast<std::int64_t>(k - begin));
    labels.push_back(patches[order[k]].label);
  }
  return t;
}

void check_patches(const ClassifierSpec& spec, const std::vector<LabeledPatch>& patches) {
  if (patches.empty()) throw ValidationError("classifier: no patches");
  for (const auto& p : patches) {
    if (p.image.height % 32 != 0 || p.image.width % 32 != 0 || p.image.height < 32) {
      throw ShapeError("classifier patches must be multiples of 32 pixels, got " +
                       std::to_string(p.image.height) + "x" + std::to_string(p.image.width));
    }
    if (p.label < 0 || p.label >= spec.classes) {
      throw ValidationError("patch label " + std::to_string(p.label) + " is outside [0, " +
                            std::to_string(spec.classes) + ")");
    }
  }
}

}  // namespace

std::vector<int> classify(const ClassifierSpec& spec, const ParamSet& params,
                          const std::vector<LabeledPatch>& patches) {
  check_patches(spec, patches);
  Eager<float> ops;
  std::vector<int> out;
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> labels;
  constexpr std::size_t kChunk = 32;
  for (std::size_t b = 0; b < patches.size(); b += kChunk) {
    const std::size_t e = std::min(patches.size(), b + kChunk);
    const Tensor x = patch_batch(patches, order, b, e, labels);
    auto param = [&](std::size_t k) { return ops.param(params[k].tensor); };
    const Tensor z = classifier_logits(ops, param, x);
    for (std::int64_t n = 0; n < z.shape().n; ++n) {
      int best = 0;
      for (int c = 1; c < spec.classes; ++c)
        if (z.at(n, c, 0, 0) > z.at(n, best, 0, 0)) best = c;
      out.push_back(best);
    }
  }
  return out;
}

double classifier_accuracy(const ClassifierSpec& spec, const ParamSet& params,
                           const std::vector<LabeledPatch>& patches) {
  const auto pred = classify(spec, params, patches);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == patches[i].label ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

ClassifierReport train_surrogate_classifier(const std::vector<LabeledPatch>& patches,
                                            const ClassifierTrainConfig& config) {
  config.spec.validate();
  check_patches(config.spec, patches);
  if (config.epochs < 0 || config.batch_size < 1) throw ConfigError("classifier epochs/batch_size invalid");
  ClassifierReport report;
  ParamSet params = build_classifier(config.spec, config.seed);
  std::vector<OptState<float>> states;
  for (std::size_t i = 0; i < params.size(); ++i)
    states.emplace_back(static_cast<float>(config.lr), static_cast<float>(config.momentum));
  std::mt19937_64 rng(mix_seed(config.seed, fnv1a("classifier-shuffle")));
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> labels;
  const auto bs = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int b = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs, ++b) {
      const std::size_t end = std::min(order.size(), begin + bs);
      Tape<float> tape;
      const Var x = tape.constant(patch_batch(patches, order, begin, end, labels));
      std::vector<Var> vars;
      for (auto& p : params) vars.push_back(tape.param(p.tensor));
      auto param = [&](std::size_t k) { return vars[k]; };
      const Var loss = tape.softmax_cross_entropy(classifier_logits(tape, param, x), labels);
      const double l = tape.scalar(loss);
      if (!std::isfinite(l)) {
        throw DivergenceError(epoch, b, "classifier loss became non-finite at epoch " +
                                            std::to_string(epoch) + " batch " + std::to_string(b));
      }
      tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) sgd_momentum_step(params[i].tensor, states[i]);
      sum += l * static_cast<double>(end - begin);
    }
    report.epoch_loss.push_back(sum / static_cast<double>(order.size()));
  }
  report.accuracy = classifier_accuracy(config.spec, params, patches);
  report.checkpoint.kind = ModelKind::classifier;
  report.checkpoint.classifier = config.spec;
  report.checkpoint.params = std::move(params);
  return report;
}

}  // namespace rootnet
