// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/core.h>

#include "rootnet/errors.hpp"

namespace rootnet::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run", {"experiment", "out", "seed", "threads", "trials"}},
      {"arch", {"variant", "depth", "base_width"}},
      {"train",
       {"recipe", "lr", "momentum", "batch_size", "epochs", "pos_weight", "eval_every", "init_mode",
        "init_source"}},
      {"data",
       {"dataset", "eval_dataset", "source_dataset", "target_dataset", "train_fraction", "tile_rows",
        "tile_cols"}},
      {"synth",
       {"family", "count", "size", "height", "width", "min_roots", "max_roots", "min_diameter",
        "max_diameter", "diameter_variation", "curvature", "occlusion_prob", "bubble_density",
        "target_density", "soil_color", "root_color", "texture_scale", "texture_amplitude",
        "pixel_noise", "pair", "source_count", "target_count", "target_train", "source_seed",
        "target_seed"}},
      {"metrics", {"bins", "fpr_target", "threshold"}},
      {"eval", {"checkpoint", "dataset"}},
      {"segment", {"checkpoint", "images", "threshold", "at_fpr", "calibration"}},
      {"slic", {"images", "masks", "target_size", "compactness", "iterations"}},
      {"transfer",
       {"base_width", "trials", "regimes", "scratch_lr", "pretrained_lr", "lr_scale", "momentum",
        "batch_size", "epochs", "pos_weight", "bins", "source_checkpoint", "source_lr",
        "source_momentum", "source_epochs", "source_pos_weight", "source_train_fraction",
        "classifier_checkpoint", "classifier_classes", "classifier_per_class", "classifier_patch",
        "classifier_lr", "classifier_epochs", "classifier_batch_size"}},
  };
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  bool has_section(const std::string& section) const { return tree_.find(section) != tree_.not_found(); }

  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <typename T>
  std::optional<T> num(const std::string& key) const {
    auto s = raw(key);
    if (!s) return std::nullopt;
    T value{};
    const char* end = s->data() + s->size();
    auto [p, ec] = std::from_chars(s->data(), end, value);
    if (ec != std::errc() || p != end || s->empty())
      throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, *s));
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: value must be finite", key));
    }
    return value;
  }

  template <typename T>
  void set(const std::string& key, T& out) const {
    if (auto v = num<T>(key)) out = *v;
  }

  void set_bool(const std::string& key, bool& out) const {
    auto s = raw(key);
    if (!s) return;
    if (*s == "true" || *s == "1" || *s == "yes" || *s == "on") {
      out = true;
    } else if (*s == "false" || *s == "0" || *s == "no" || *s == "off") {
      out = false;
    } else {
      throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, *s));
    }
  }

  void set_path(const std::string& key, fs::path& out) const {
    if (auto s = raw(key)) {
      if (s->empty()) throw ConfigError(fmt::format("{}: empty path", key));
      out = *s;
    }
  }

  void set_rgb(const std::string& key, Rgb& out) const {
    auto s = raw(key);
    if (!s) return;
    std::stringstream ss(*s);
    std::string part;
    std::vector<double> v;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      double d = 0.0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
      if (ec != std::errc() || p != part.data() + part.size() || part.empty())
        throw ConfigError(fmt::format("{}: expected three comma-separated numbers, got '{}'", key, *s));
      v.push_back(d);
    }
    if (v.size() != 3) throw ConfigError(fmt::format("{}: expected three comma-separated numbers, got '{}'", key, *s));
    for (double d : v)
      if (d < 0.0 || d > 255.0) throw ConfigError(fmt::format("{}: colour components must lie in [0, 255]", key));
    out = {v[0], v[1], v[2]};
  }

 private:
  const pt::ptree& tree_;
};

std::set<std::string> section_headers(const std::string& text) {
  std::set<std::string> names;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') names.insert(trim(line.substr(1, line.size() - 2)));
  }
  return names;
}

void check_schema(const pt::ptree& tree, const std::set<std::string>& sections) {
  for (const auto& [section, body] : tree) {
    if (!sections.count(section)) throw ConfigError(fmt::format("key '{}' must live inside a section", section));
    auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(fmt::format("unknown section [{}]", section));
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError(fmt::format("unknown key '{}.{}'", section, key));
      if (!value.empty()) throw ConfigError(fmt::format("key '{}.{}' is nested", section, key));
    }
  }
}

void require_exists(const fs::path& p, const std::string& key) {
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError(fmt::format("{}: '{}' does not exist", key, p.string()));
}

void require_dir(const fs::path& p, const std::string& key) {
  require_exists(p, key);
  if (!fs::is_directory(p)) throw ConfigError(fmt::format("{}: '{}' is not a directory", key, p.string()));
}

void read_synth(const Reader& r, RunConfig& c) {
  SynthSection& s = c.synth;
  s.present = r.has_section("synth");
  if (auto f = r.raw("synth.family")) s.family = *f;
  if (s.family == "default") {
    s.params = GenParams{};
  } else if (s.family == "source") {
    s.params = source_family(c.seed);
  } else if (s.family == "target") {
    s.params = target_family(c.seed);
  } else {
    throw ConfigError(fmt::format("synth.family: expected default, source or target, got '{}'", s.family));
  }
  GenParams& g = s.params;
  g.seed = c.seed;
  if (auto size = r.num<std::int64_t>("synth.size")) g.height = g.width = *size;
  r.set("synth.height", g.height);
  r.set("synth.width", g.width);
  r.set("synth.count", s.count);
  r.set("synth.min_roots", g.min_roots);
  r.set("synth.max_roots", g.max_roots);
  r.set("synth.min_diameter", g.min_diameter);
  r.set("synth.max_diameter", g.max_diameter);
  r.set("synth.diameter_variation", g.diameter_variation);
  r.set("synth.curvature", g.curvature);
  r.set("synth.occlusion_prob", g.occlusion_prob);
  r.set("synth.bubble_density", g.bubble_density);
  r.set("synth.target_density", g.target_density);
  r.set_rgb("synth.soil_color", g.soil_color);
  r.set_rgb("synth.root_color", g.root_color);
  r.set("synth.texture_scale", g.texture_scale);
  r.set("synth.texture_amplitude", g.texture_amplitude);
  r.set("synth.pixel_noise", g.pixel_noise);
  r.set_bool("synth.pair", s.pair);
  r.set("synth.source_count", s.pair_options.source_count);
  r.set("synth.target_count", s.pair_options.target_count);
  r.set("synth.target_train", s.pair_options.target_train);
  s.source_seed = c.seed;
  s.target_seed = c.seed + 1;
  r.set("synth.source_seed", s.source_seed);
  r.set("synth.target_seed", s.target_seed);
  s.pair_options.size = g.height;
  if (s.present) {
    g.validate();
    if (s.count < 1) throw ConfigError("synth.count must be >= 1");
    if (s.pair) {
      if (g.height != g.width) throw ConfigError("synth.pair needs square images (use synth.size)");
      if (s.pair_options.source_count < 1) throw ConfigError("synth.source_count must be >= 1");
      if (s.pair_options.target_train < 1 || s.pair_options.target_train >= s.pair_options.target_count)
        throw ConfigError("synth.target_train must lie in [1, synth.target_count)");
    }
  }
}

void read_train(const Reader& r, RunConfig& c) {
  TrainConfig& t = c.train;
  ArchSpec arch;
  if (auto v = r.raw("arch.variant")) arch.variant = parse_variant(*v);
  r.set("arch.base_width", arch.base_width);
  if (arch.variant == Variant::vgg13) {
    arch = vgg13_spec(arch.base_width);
    if (auto d = r.num<int>("arch.depth"); d && *d != arch.depth)
      throw ConfigError(fmt::format("arch.depth is fixed at {} for the vgg13 variant", arch.depth));
  } else {
    r.set("arch.depth", arch.depth);
  }

  if (auto recipe = r.raw("train.recipe")) {
    if (*recipe == "peanut") {
      t = peanut_recipe(arch.depth, arch.base_width);
    } else if (*recipe == "switchgrass-scratch" || *recipe == "switchgrass-pretrained") {
      t = switchgrass_recipe(*recipe == "switchgrass-pretrained", arch.base_width);
      if (arch.variant != Variant::vgg13)
        throw ConfigError("train.recipe " + *recipe + " needs arch.variant = vgg13");
    } else {
      throw ConfigError(fmt::format("train.recipe: expected peanut, switchgrass-scratch or "
                                    "switchgrass-pretrained, got '{}'", *recipe));
    }
  }
  t.arch = arch;
  t.seed = c.seed;
  r.set("train.lr", t.lr);
  r.set("train.momentum", t.momentum);
  r.set("train.batch_size", t.batch_size);
  r.set("train.epochs", t.epochs);
  r.set("train.eval_every", t.eval_every);
  if (auto pw = r.raw("train.pos_weight"); pw && *pw == "auto") {
    c.auto_pos_weight = true;
  } else {
    r.set("train.pos_weight", t.pos_weight);
  }
  t.bins = c.metrics.bins;
  if (auto m = r.raw("train.init_mode")) c.init.kind = parse_init_kind(*m);
  r.set_path("train.init_source", c.init.source);
}

void read_transfer(const Reader& r, RunConfig& c) {
  TransferExperimentConfig& x = c.transfer;
  x.seed = c.seed;
  r.set("transfer.base_width", x.base_width);
  r.set("transfer.trials", x.trials);
  if (auto regimes = r.raw("transfer.regimes")) {
    x.regimes.clear();
    std::stringstream ss(*regimes);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (part == "S") {
        x.regimes.push_back(InitKind::scratch);
      } else if (part == "I") {
        x.regimes.push_back(InitKind::encoder_from_classifier);
      } else if (part == "P-En") {
        x.regimes.push_back(InitKind::encoder_from_checkpoint);
      } else if (part == "P-EnDe") {
        x.regimes.push_back(InitKind::encoder_decoder_from_checkpoint);
      } else {
        x.regimes.push_back(parse_init_kind(part));
      }
    }
  }
  r.set("transfer.scratch_lr", x.scratch_lr);
  r.set("transfer.pretrained_lr", x.pretrained_lr);
  r.set("transfer.lr_scale", x.lr_scale);
  r.set("transfer.momentum", x.momentum);
  r.set("transfer.batch_size", x.batch_size);
  r.set("transfer.epochs", x.epochs);
  r.set("transfer.pos_weight", x.pos_weight);
  r.set("transfer.bins", x.bins);
  r.set_path("transfer.source_checkpoint", x.source_checkpoint);
  r.set("transfer.source_lr", x.source_lr);
  r.set("transfer.source_momentum", x.source_momentum);
  r.set("transfer.source_epochs", x.source_epochs);
  r.set("transfer.source_pos_weight", x.source_pos_weight);
  r.set("transfer.source_train_fraction", x.source_train_fraction);
  r.set_path("transfer.classifier_checkpoint", x.classifier_checkpoint);
  r.set("transfer.classifier_classes", x.classifier_data.classes);
  r.set("transfer.classifier_per_class", x.classifier_data.per_class);
  r.set("transfer.classifier_patch", x.classifier_data.patch);
  r.set("transfer.classifier_lr", x.classifier.lr);
  r.set("transfer.classifier_epochs", x.classifier.epochs);
  r.set("transfer.classifier_batch_size", x.classifier.batch_size);
}

void validate_metrics(const MetricsSection& m) {
  if (m.bins < 2) throw ConfigError("metrics.bins must be >= 2");
  if (!(m.fpr_target >= 0.0 && m.fpr_target <= 1.0)) throw ConfigError("metrics.fpr_target must lie in [0, 1]");
  if (!(m.threshold > 0.0 && m.threshold < 1.0)) throw ConfigError("metrics.threshold must lie in (0, 1)");
}

void validate_training_data(const RunConfig& c) {
  const bool has_dataset = !c.data.dataset.empty();
  if (has_dataset == c.synth.present)
    throw ConfigError("give exactly one of data.dataset or a [synth] section");
  if (has_dataset) require_dir(c.data.dataset, "data.dataset");
  if (!c.data.eval_dataset.empty()) {
    require_dir(c.data.eval_dataset, "data.eval_dataset");
  } else if (!(c.data.train_fraction > 0.0 && c.data.train_fraction <= 1.0)) {
    throw ConfigError("data.train_fraction must lie in (0, 1]");
  }
  if (c.data.tile_rows < 1 || c.data.tile_cols < 1) throw ConfigError("data.tile_rows and data.tile_cols must be >= 1");
}

void validate(RunConfig& c) {
  if (c.threads < 1) throw ConfigError("run.threads must be >= 1");
  if (c.trials < 1) throw ConfigError("run.trials must be >= 1");
  if (c.experiment.empty() || c.experiment.find_first_of("/\\") != std::string::npos)
    throw ConfigError("run.experiment must be a plain, non-empty name");
  validate_metrics(c.metrics);

  switch (c.command) {
    case Command::synth:
      if (!c.synth.present) throw ConfigError("synth needs a [synth] section");
      break;
    case Command::train:
      validate_training_data(c);
      c.train.validate();
      if (c.init.kind != InitKind::scratch) {
        if (c.init.source.empty())
          throw ConfigError("train.init_mode " + to_string(c.init.kind) + " needs train.init_source");
        require_exists(c.init.source, "train.init_source");
      }
      break;
    case Command::eval:
      if (c.eval.checkpoint.empty()) throw ConfigError("eval needs eval.checkpoint");
      require_exists(c.eval.checkpoint, "eval.checkpoint");
      if (c.eval.dataset.empty() == !c.synth.present)
        throw ConfigError("give exactly one of eval.dataset or a [synth] section");
      if (!c.eval.dataset.empty()) require_dir(c.eval.dataset, "eval.dataset");
      break;
    case Command::segment: {
      const SegmentSection& s = c.segment;
      if (s.checkpoint.empty()) throw ConfigError("segment needs segment.checkpoint");
      require_exists(s.checkpoint, "segment.checkpoint");
      if (s.images.empty()) throw ConfigError("segment needs segment.images");
      require_exists(s.images, "segment.images");
      if (s.threshold.has_value() == s.at_fpr.has_value())
        throw ConfigError("give exactly one of segment.threshold or segment.at_fpr (--at-fpr)");
      if (s.threshold && !(*s.threshold > 0.0 && *s.threshold < 1.0))
        throw ConfigError("segment.threshold must lie in (0, 1)");
      if (s.at_fpr) {
        if (!(*s.at_fpr >= 0.0 && *s.at_fpr <= 1.0)) throw ConfigError("segment.at_fpr must lie in [0, 1]");
        if (s.calibration.empty())
          throw ConfigError("segment.at_fpr needs segment.calibration, a dataset with masks");
        require_dir(s.calibration, "segment.calibration");
        require_dir(s.calibration / "masks", "segment.calibration masks");
      }
      break;
    }
    case Command::slic:
      if (c.slic.images.empty()) throw ConfigError("slic needs slic.images");
      require_exists(c.slic.images, "slic.images");
      if (!c.slic.masks.empty()) require_exists(c.slic.masks, "slic.masks");
      c.slic.params.validate();
      break;
    case Command::transfer_experiment: {
      const bool dirs = !c.data.source_dataset.empty() || !c.data.target_dataset.empty();
      if (dirs == c.synth.present)
        throw ConfigError("give exactly one of data.source_dataset/data.target_dataset or a [synth] section");
      if (dirs) {
        if (c.data.target_dataset.empty()) throw ConfigError("data.target_dataset is missing");
        require_dir(c.data.target_dataset, "data.target_dataset");
        if (!c.data.source_dataset.empty()) require_dir(c.data.source_dataset, "data.source_dataset");
      } else {
        const auto& o = c.synth.pair_options;
        if (o.target_train < 1 || o.target_train >= o.target_count)
          throw ConfigError("synth.target_train must lie in [1, synth.target_count)");
      }
      const bool pretrained = c.transfer.needs(InitKind::encoder_from_checkpoint) ||
                              c.transfer.needs(InitKind::encoder_decoder_from_checkpoint);
      if (pretrained && c.transfer.source_checkpoint.empty() && dirs && c.data.source_dataset.empty())
        throw ConfigError("P-En/P-EnDe need data.source_dataset or transfer.source_checkpoint");
      if (!c.transfer.source_checkpoint.empty()) require_exists(c.transfer.source_checkpoint, "transfer.source_checkpoint");
      if (!c.transfer.classifier_checkpoint.empty())
        require_exists(c.transfer.classifier_checkpoint, "transfer.classifier_checkpoint");
      c.transfer.validate();
      break;
    }
  }
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::synth: return "synth";
    case Command::train: return "train";
    case Command::eval: return "eval";
    case Command::segment: return "segment";
    case Command::slic: return "slic";
    case Command::transfer_experiment: return "transfer-experiment";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::synth, Command::train, Command::eval, Command::segment, Command::slic,
                    Command::transfer_experiment}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError(fmt::format("unknown command '{}'", name));
}

RunConfig load_run_config(Command command, const std::string& ini_text, const Overrides& overrides) {
  RunConfig c;
  c.command = command;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, c.tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  std::set<std::string> sections = section_headers(ini_text);
  for (const auto& name : sections)
    if (c.tree.find(name) == c.tree.not_found()) c.tree.push_back({name, pt::ptree()});
  for (const auto& a : overrides.assignments) {
    const auto eq = a.find('=');
    const std::string key = trim(a.substr(0, eq));
    if (eq == std::string::npos || key.find('.') == std::string::npos)
      throw ConfigError(fmt::format("--set expects section.key=value, got '{}'", a));
    c.tree.put(pt::ptree::path_type(key, '.'), trim(a.substr(eq + 1)));
    sections.insert(key.substr(0, key.find('.')));
  }
  for (const char* name : {"run", "synth", "segment"}) sections.insert(name);
  if (overrides.seed) c.tree.put("run.seed", *overrides.seed);
  if (overrides.out) c.tree.put("run.out", overrides.out->string());
  if (overrides.threads) c.tree.put("run.threads", *overrides.threads);
  if (overrides.pair) c.tree.put("synth.pair", "true");
  if (overrides.at_fpr) {
    c.tree.put("segment.at_fpr", *overrides.at_fpr);
    if (auto seg = c.tree.get_child_optional("segment")) seg->erase("threshold");
  }
  check_schema(c.tree, sections);

  const Reader r(c.tree);
  if (auto e = r.raw("run.experiment")) c.experiment = *e;
  r.set_path("run.out", c.out);
  r.set("run.seed", c.seed);
  r.set("run.threads", c.threads);
  r.set("run.trials", c.trials);
  c.svg = overrides.svg;

  r.set("metrics.bins", c.metrics.bins);
  r.set("metrics.fpr_target", c.metrics.fpr_target);
  r.set("metrics.threshold", c.metrics.threshold);

  read_synth(r, c);
  read_train(r, c);
  read_transfer(r, c);

  r.set_path("data.dataset", c.data.dataset);
  r.set_path("data.eval_dataset", c.data.eval_dataset);
  r.set_path("data.source_dataset", c.data.source_dataset);
  r.set_path("data.target_dataset", c.data.target_dataset);
  r.set("data.train_fraction", c.data.train_fraction);
  r.set("data.tile_rows", c.data.tile_rows);
  r.set("data.tile_cols", c.data.tile_cols);

  r.set_path("eval.checkpoint", c.eval.checkpoint);
  r.set_path("eval.dataset", c.eval.dataset);

  r.set_path("segment.checkpoint", c.segment.checkpoint);
  r.set_path("segment.images", c.segment.images);
  r.set_path("segment.calibration", c.segment.calibration);
  c.segment.threshold = r.num<double>("segment.threshold");
  c.segment.at_fpr = r.num<double>("segment.at_fpr");

  r.set_path("slic.images", c.slic.images);
  r.set_path("slic.masks", c.slic.masks);
  r.set("slic.target_size", c.slic.params.target_size);
  r.set("slic.compactness", c.slic.params.compactness);
  r.set("slic.iterations", c.slic.params.iterations);

  validate(c);
  return c;
}

RunConfig load_run_config_file(Command command, const fs::path& path, const Overrides& overrides) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_run_config(command, ss.str(), overrides);
}

}  // namespace rootnet::cli
