// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/unet.hpp"

#include <cmath>
#include <random>
#include <regex>

#include "rootnet/hash.hpp"

namespace rootnet {

std::string to_string(Variant v) { return v == Variant::vgg13 ? "vgg13" : "generic"; }

Variant parse_variant(std::string_view text) {
  if (text == "generic") return Variant::generic;
  if (text == "vgg13") return Variant::vgg13;
  throw ConfigError("unknown variant '" + std::string(text) + "' (expected generic or vgg13)");
}

void ArchSpec::validate() const {
  if (depth < 2) throw ConfigError("depth must be at least 2, got " + std::to_string(depth));
  if (variant == Variant::vgg13 && depth != 5) {
    throw ConfigError("the vgg13 variant has depth 5, got " + std::to_string(depth));
  }
  if (depth > 12) throw ConfigError("depth " + std::to_string(depth) + " is unreasonably deep");
  if (base_width < 1) throw ConfigError("base_width must be positive");
  if (in_channels < 1) throw ConfigError("in_channels must be positive");
  if (out_channels != 1) throw ConfigError("out_channels must be 1 (single root logit)");
}

std::vector<std::pair<int, int>> ArchSpec::encoder_channels() const {
  std::vector<std::pair<int, int>> out;
  if (variant == Variant::vgg13) {
    const int b = base_width;
    return {{b, b}, {2 * b, 2 * b}, {4 * b, 4 * b}, {8 * b, 8 * b}, {8 * b, 8 * b}};
  }
  for (int i = 0; i < depth; ++i) out.emplace_back(base_width << i, base_width << i);
  return out;
}

int ArchSpec::bottleneck_channels() const {
  return variant == Variant::vgg13 ? 8 * base_width : base_width << depth;
}

ArchSpec vgg13_spec(int base_width) {
  ArchSpec s;
  s.variant = Variant::vgg13;
  s.depth = 5;
  s.base_width = base_width;
  return s;
}

std::string to_string(Partition p) {
  switch (p) {
    case Partition::encoder: return "encoder";
    case Partition::decoder: return "decoder";
    case Partition::head: return "head";
  }
  return "?";
}

Partition partition(std::string_view name) {
  static const std::regex grammar(
      R"(^(?:(enc\d+\.conv\d+)|(bottleneck\.conv\d+)|(dec\d+\.(?:up|conv\d+))|(head))\.(?:weight|bias)$)");
  std::cmatch m;
  if (!std::regex_match(name.data(), name.data() + name.size(), m, grammar)) {
    throw FormatError("parameter name '" + std::string(name) + "' does not follow the grammar");
  }
  if (m[1].matched || m[2].matched) return Partition::encoder;
  if (m[3].matched) return Partition::decoder;
  return Partition::head;
}

ParamSet::ParamSet(std::vector<NamedParam> params) : params_(std::move(params)) {
  for (std::size_t i = 0; i < params_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (params_[i].name == params_[j].name) {
        throw FormatError("duplicate parameter name '" + params_[i].name + "'");
      }
}

const NamedParam* ParamSet::find(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

NamedParam* ParamSet::find(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void ParamSet::clear_grads() {
  for (auto& p : params_) p.tensor.clear_grad();
}

bool operator==(const ParamSet& a, const ParamSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !(a[i].tensor == b[i].tensor)) return false;
  return true;
}

std::vector<std::pair<std::string, Shape>> param_layout(const ArchSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::string, Shape>> out;
  auto conv = [&](const std::string& prefix, std::int64_t cin, std::int64_t cout, std::int64_t k) {
    out.emplace_back(prefix + ".weight", Shape{cout, cin, k, k});
    out.emplace_back(prefix + ".bias", Shape{cout, 1, 1, 1});
  };
  const auto enc = spec.encoder_channels();
  int c = spec.in_channels;
  for (int i = 0; i < spec.depth; ++i) {
    const std::string p = "enc" + std::to_string(i);
    conv(p + ".conv0", c, enc[i].first, 3);
    conv(p + ".conv1", enc[i].first, enc[i].second, 3);
    c = enc[i].second;
  }
  const int bc = spec.bottleneck_channels();
  conv("bottleneck.conv0", c, bc, 3);
  conv("bottleneck.conv1", bc, bc, 3);
  c = bc;
  for (int i = spec.depth - 1; i >= 0; --i) {
    const std::string p = "dec" + std::to_string(i);
    const int skip = enc[i].second;
    // Transpose-conv weights are [Cin, Cout, 2, 2].
    out.emplace_back(p + ".up.weight", Shape{c, skip, 2, 2});
    out.emplace_back(p + ".up.bias", Shape{skip, 1, 1, 1});
    conv(p + ".conv0", 2 * skip, skip, 3);
    conv(p + ".conv1", skip, skip, 3);
    c = skip;
  }
  conv("head", c, spec.out_channels, 1);
  return out;
}

void check_params(const ArchSpec& spec, const ParamSet& params) {
  const auto layout = param_layout(spec);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (i >= params.size()) {
      throw ShapeError("parameter set ends before '" + layout[i].first + "'");
    }
    if (params[i].name != layout[i].first) {
      throw ShapeError("expected parameter '" + layout[i].first + "' at position " +
                       std::to_string(i) + ", found '" + params[i].name + "'");
    }
    if (params[i].tensor.shape() != layout[i].second) {
      throw ShapeError("parameter '" + layout[i].first + "' has shape " +
                       to_string(params[i].tensor.shape()) + ", expected " +
                       to_string(layout[i].second));
    }
  }
  if (params.size() != layout.size()) {
    throw ShapeError("unexpected extra parameter '" + params[layout.size()].name + "'");
  }
}

void init_param(NamedParam& param, std::uint64_t seed) {
  const Shape s = param.tensor.shape();
  const bool bias = param.name.size() >= 5 && param.name.ends_with(".bias");
  if (bias) {
    param.tensor = Tensor(s, 0.0f);
    return;
  }
  const bool transpose = param.name.find(".up.") != std::string::npos;
  const double fan_in = transpose ? static_cast<double>(s.n) : static_cast<double>(s.c * s.h * s.w);
  std::mt19937_64 rng(mix_seed(seed, fnv1a(param.name)));
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  std::vector<float> v(s.numel());
  for (auto& x : v) x = static_cast<float>(normal(rng));
  param.tensor = Tensor(s, std::move(v));
}

ParamSet build(const ArchSpec& spec, std::uint64_t seed) {
  std::vector<NamedParam> params;
  for (auto& [name, shape] : param_layout(spec)) {
    NamedParam p{name, Tensor(shape)};
    init_param(p, seed);
    params.push_back(std::move(p));
  }
  return ParamSet(std::move(params));
}

std::int64_t count_params(const ArchSpec& spec) {
  std::int64_t total = 0;
  for (const auto& [name, shape] : param_layout(spec)) total += static_cast<std::int64_t>(shape.numel());
  return total;
}

PadRecord pad_record(std::int64_t height, std::int64_t width, int depth) {
  if (height < 1 || width < 1) {
    throw ShapeError("input extent must be positive, got " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  const std::int64_t m = std::int64_t{1} << depth;
  PadRecord r;
  r.height = height;
  r.width = width;
  r.padded_height = (height + m - 1) / m * m;
  r.padded_width = (width + m - 1) / m * m;
  r.bottom = r.padded_height - height;
  r.right = r.padded_width - width;
  return r;
}

Tensor forward(const ArchSpec& spec, const ParamSet& params, const Tensor& batch) {
  check_params(spec, params);
  if (batch.shape().c != spec.in_channels) {
    throw ShapeError("forward: batch " + to_string(batch.shape()) + " does not have " +
                     std::to_string(spec.in_channels) + " channels");
  }
  Eager<float> ops;
  auto param = [&](std::size_t k) { return ops.param(params[k].tensor); };
  return ops.sigmoid(unet_forward_logits(ops, spec, param, batch));
}

Var forward_logits(Tape<float>& tape, const ArchSpec& spec, ParamSet& params, Var batch) {
  check_params(spec, params);
  if (tape.shape(batch).c != spec.in_channels) {
    throw ShapeError("forward: batch " + to_string(tape.shape(batch)) + " does not have " +
                     std::to_string(spec.in_channels) + " channels");
  }
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (auto& p : params) vars.push_back(tape.param(p.tensor));
  auto param = [&](std::size_t k) { return vars[k]; };
  return unet_forward_logits(tape, spec, param, batch);
}

}  // namespace rootnet
