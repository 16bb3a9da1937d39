// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/chrono.h>
#include <fmt/core.h>
#include <json.hpp>

#include "rootnet/errors.hpp"
#include "rootnet/hash.hpp"
#include "rootnet/metrics.hpp"

namespace rootnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

Image as_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image rgb(img.height, img.width, 3);
  for (std::size_t i = 0; i < img.pixels(); ++i)
    for (int c = 0; c < 3; ++c) rgb.data[3 * i + c] = img.data[i];
  return rgb;
}

Image to_0_255(Image mask) {
  for (auto& v : mask.data) v = v ? 255 : 0;
  return mask;
}

SampleSet tiled(const SampleSet& set, int rows, int cols) {
  if (rows == 1 && cols == 1) return set;
  SampleSet out;
  for (const auto& s : set) {
    SampleSet t = tile_image(s, rows, cols);
    out.insert(out.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return out;
}

json params_json(const GenParams& g) {
  return {{"height", g.height},
          {"width", g.width},
          {"min_roots", g.min_roots},
          {"max_roots", g.max_roots},
          {"min_diameter", g.min_diameter},
          {"max_diameter", g.max_diameter},
          {"diameter_variation", g.diameter_variation},
          {"curvature", g.curvature},
          {"occlusion_prob", g.occlusion_prob},
          {"bubble_density", g.bubble_density},
          {"target_density", g.target_density},
          {"soil_color", g.soil_color},
          {"root_color", g.root_color},
          {"texture_scale", g.texture_scale},
          {"texture_amplitude", g.texture_amplitude},
          {"pixel_noise", g.pixel_noise},
          {"seed", g.seed}};
}

json set_json(const GenParams& g, const SampleSet& set, const std::string& dir) {
  json samples = json::array();
  for (std::size_t i = 0; i < set.size(); ++i)
    samples.push_back({{"id", set[i].id}, {"seed", mix_seed(g.seed, i)}});
  return {{"directory", dir}, {"params", params_json(g)}, {"samples", samples}};
}

void cmd_synth(const RunConfig& c, const fs::path& dir, std::ostream& out) {
  json manifest = {{"seed", c.seed}};
  if (c.synth.pair) {
    const auto& o = c.synth.pair_options;
    const DomainPair pair = gen_domain_pair(c.synth.source_seed, c.synth.target_seed, o);
    save_sample_set(dir / "source", pair.source);
    save_sample_set(dir / "target", pair.target);
    save_sample_set(dir / "target_train", pair.target_train);
    save_sample_set(dir / "target_eval", pair.target_eval);
    manifest["source"] = set_json(source_family(c.synth.source_seed, o.size), pair.source, "source");
    manifest["target"] = set_json(target_family(c.synth.target_seed, o.size), pair.target, "target");
    manifest["target_train"] = o.target_train;
    out << fmt::format("wrote {} source and {} target images ({} train / {} eval) to {}\n",
                       pair.source.size(), pair.target.size(), pair.target_train.size(),
                       pair.target_eval.size(), dir.string());
  } else {
    const SampleSet set = gen_sample_set(c.synth.params, c.synth.count, "img");
    save_sample_set(dir / "dataset", set);
    manifest["family"] = c.synth.family;
    manifest["dataset"] = set_json(c.synth.params, set, "dataset");
    out << fmt::format("wrote {} images to {}\n", set.size(), (dir / "dataset").string());
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

struct TrainData {
  SampleSet train;
  SampleSet eval;
};

TrainData training_data(const RunConfig& c) {
  SampleSet all = c.synth.present ? gen_sample_set(c.synth.params, c.synth.count, "img")
                                  : load_sample_set(c.data.dataset);
  TrainData d;
  if (!c.data.eval_dataset.empty()) {
    d.train = std::move(all);
    d.eval = load_sample_set(c.data.eval_dataset);
  } else if (c.data.train_fraction == 1.0) {
    d.train = all;
    d.eval = std::move(all);
  } else {
    Split s = stratified_split(all, c.data.train_fraction, c.seed);
    if (s.test.empty()) throw ValidationError("the split left no evaluation images; lower data.train_fraction");
    d.train = std::move(s.train);
    d.eval = std::move(s.test);
  }
  d.train = tiled(d.train, c.data.tile_rows, c.data.tile_cols);
  d.eval = tiled(d.eval, c.data.tile_rows, c.data.tile_cols);
  return d;
}

void cmd_train(const RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& log) {
  Checkpoint source;
  if (c.init.kind != InitKind::scratch) source = load_checkpoint(c.init.source);

  TrainData d = training_data(c);
  TrainConfig t = c.train;
  if (c.auto_pos_weight) {
    const PosWeight pw = compute_pos_weight(d.train);
    t.pos_weight = pw.value;
    log << fmt::format("pos_weight = {:.4f} (median over {} masks, {} without roots)\n", pw.value, pw.used,
                       pw.excluded);
  }
  t.validate();
  log << fmt::format("training {} trial(s): {} train / {} eval images, {} epochs\n", c.trials, d.train.size(),
                     d.eval.size(), t.epochs);

  InitFn init;
  if (c.init.kind != InitKind::scratch) {
    init = [&](std::uint64_t seed) { return init_model(t.arch, c.init.kind, &source, seed).params; };
  }
  TrainHooks hooks;
  hooks.after_epoch = [&](const TrialReport& r, const ParamSet&) {
    log << fmt::format("  seed {} epoch {} loss {:.5f}\n", r.seed, r.epoch_loss.size(), r.epoch_loss.back());
    return false;
  };
  const TrialsResult res = run_trials(t, c.trials, d.train, d.eval, init, hooks);
  for (std::size_t k = 0; k < res.reports.size(); ++k)
    save(res.reports[k].params, t.arch, dir / fmt::format("trial_{}.ckpt", k));
  write_metrics_csv(dir / "metrics.csv", res.reports);
  const std::vector<ModelSummary> rows{{c.experiment, res.summary}};
  write_summary_csv(dir / "summary.csv", rows);
  out << format_summary_table(rows);
}

void write_curves(const RunConfig& c, const fs::path& dir, const ScoreHistogram& h, const std::string& name) {
  const CurveSummary roc = roc_curve(h);
  const CurveSummary pr = pr_curve(h);
  write_roc_csv(dir / "roc.csv", roc);
  write_pr_csv(dir / "pr.csv", pr);
  if (c.svg) {
    write_curve_svg(dir / "roc.svg", roc, name + " ROC", "false positive rate", "true positive rate");
    write_curve_svg(dir / "pr.svg", pr, name + " PR", "recall", "precision");
  }
}

void cmd_eval(const RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& log) {
  const auto [spec, params] = load(c.eval.checkpoint);
  SampleSet set = c.synth.present ? gen_sample_set(c.synth.params, c.synth.count, "img")
                                  : load_sample_set(c.eval.dataset);
  set = tiled(set, c.data.tile_rows, c.data.tile_cols);
  log << fmt::format("evaluating {} on {} images\n", c.eval.checkpoint.string(), set.size());
  const ScoreHistogram h = evaluate(spec, params, set, c.metrics.bins);
  const std::string name = c.eval.checkpoint.stem().string();
  write_curves(c, dir, h, name);

  const Snapshot snap = summarize_histogram(h, 0);
  TrialSummary s;
  s.mean_roc_auc = snap.roc_auc;
  s.mean_pr_auc = snap.pr_auc;
  s.trials = 1;
  s.single_trial = true;
  const std::vector<ModelSummary> rows{{name, s}};
  write_summary_csv(dir / "summary.csv", rows);
  out << format_summary_table(rows);

  const FprThreshold f = threshold_at_fpr(h, c.metrics.fpr_target);
  const ConfusionAt at = confusion_at(h, c.metrics.threshold);
  const std::string ops = fmt::format(
      "threshold at FPR <= {}: {:.6f} (FPR {:.6f}, TPR {:.6f})\n"
      "threshold {}: FPR {:.6f}, TPR {:.6f}, precision {:.6f}\n",
      c.metrics.fpr_target, f.threshold, f.realized_fpr, f.realized_tpr, c.metrics.threshold,
      at.counts.fpr(), at.counts.tpr(), at.counts.precision());
  write_text(dir / "operating_points.txt", ops);
  out << ops;
}

Image segment_one(const ArchSpec& spec, const ParamSet& params, const Image& img, double threshold) {
  const Tensor probs = forward(spec, params, image_to_tensor(as_rgb(img)));
  const auto p = probs.data();
  Image mask(img.height, img.width, 1);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    mask.data[i] = static_cast<double>(p[i]) >= threshold ? 255 : 0;
  return mask;
}

void cmd_segment(const RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& log) {
  const auto [spec, params] = load(c.segment.checkpoint);
  double threshold = 0.0;
  std::string how;
  if (c.segment.threshold) {
    threshold = *c.segment.threshold;
    how = "fixed";
  } else {
    const SampleSet cal = load_sample_set(c.segment.calibration);
    log << fmt::format("calibrating on {} images\n", cal.size());
    const FprThreshold f = threshold_at_fpr(evaluate(spec, params, cal, c.metrics.bins), *c.segment.at_fpr);
    threshold = f.threshold;
    how = fmt::format("at FPR <= {} (calibration FPR {:.6f}, TPR {:.6f})", *c.segment.at_fpr, f.realized_fpr,
                      f.realized_tpr);
  }
  const auto files = collect_pngs(c.segment.images);
  make_dirs(dir / "masks");
  for (const auto& f : files) {
    const Image mask = segment_one(spec, params, read_png(f), threshold);
    write_png(dir / "masks" / (f.stem().string() + ".png"), mask);
    log << fmt::format("  {}\n", f.filename().string());
  }
  const std::string summary = fmt::format("threshold {:.6f} {}\n{} masks written\n", threshold, how, files.size());
  write_text(dir / "threshold.txt", summary);
  out << summary;
}

void cmd_slic(const RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& log) {
  const auto files = collect_pngs(c.slic.images);
  make_dirs(dir / "labels");
  if (!c.slic.masks.empty()) make_dirs(dir / "snapped");
  std::string csv = "id,height,width,superpixels,mean_area";
  csv += c.slic.masks.empty() ? "\n" : ",snapped_iou\n";
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    const Image img = read_png(f);
    const SuperpixelMap map = slic(img, c.slic.params);
    save_label_map(dir / "labels" / (id + ".png"), map);
    csv += fmt::format("{},{},{},{},{:.4f}", id, map.height, map.width, map.count,
                       static_cast<double>(map.height * map.width) / static_cast<double>(map.count));
    if (!c.slic.masks.empty()) {
      const fs::path mpath = fs::is_directory(c.slic.masks) ? c.slic.masks / (id + ".png") : c.slic.masks;
      Image mask = read_png(mpath);
      for (auto& v : mask.data) v = v ? 1 : 0;
      const Image snapped = snap_mask(mask, map);
      write_png(dir / "snapped" / (id + ".png"), to_0_255(snapped));
      csv += fmt::format(",{:.6f}", iou(snapped, mask));
    }
    csv += '\n';
    log << fmt::format("  {}: {} superpixels\n", id, map.count);
  }
  write_text(dir / "superpixels.csv", csv);
  out << fmt::format("{} label maps written to {}\n", files.size(), (dir / "labels").string());
}

void cmd_transfer(const RunConfig& c, const fs::path& dir, std::ostream& out, std::ostream& log) {
  SampleSet source, target_train, target_eval;
  if (c.synth.present) {
    DomainPair pair = gen_domain_pair(c.synth.source_seed, c.synth.target_seed, c.synth.pair_options);
    source = std::move(pair.source);
    target_train = std::move(pair.target_train);
    target_eval = std::move(pair.target_eval);
  } else {
    if (!c.data.source_dataset.empty()) source = load_sample_set(c.data.source_dataset);
    Split s = stratified_split(load_sample_set(c.data.target_dataset), c.data.train_fraction, c.seed);
    if (s.test.empty()) throw ValidationError("the target split left no evaluation images");
    target_train = std::move(s.train);
    target_eval = std::move(s.test);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const TransferExperimentResult r =
      run_transfer_experiment(c.transfer, source, target_train, target_eval, [&](const std::string& msg) {
        const auto s = std::chrono::duration_cast<std::chrono::seconds>(std::chrono::steady_clock::now() - t0);
        log << fmt::format("[{}s] {}\n", s.count(), msg) << std::flush;
      });

  if (r.source) save_checkpoint(dir / "source.ckpt", r.source_checkpoint);
  if (r.classifier) save_checkpoint(dir / "classifier.ckpt", r.classifier_checkpoint);
  const auto rows = transfer_summary(r);
  write_summary_csv(dir / "summary.csv", rows);
  write_transfer_curves_csv(dir / "curves.csv", r);
  std::string table = format_summary_table(rows);
  write_text(dir / "table.txt", table);
  out << table;
  if (r.find(InitKind::scratch) && r.find(InitKind::encoder_from_checkpoint) &&
      r.find(InitKind::encoder_decoder_from_checkpoint)) {
    const std::string ordering = format_ordering(check_transfer_ordering(r));
    write_text(dir / "ordering.txt", ordering);
    out << ordering;
  }
  if (c.svg) {
    write_transfer_curves_svg(dir / "curves_roc.svg", r, false);
    write_transfer_curves_svg(dir / "curves_pr.svg", r, true);
  }
}

}  // namespace

fs::path make_run_dir(const RunConfig& config) {
  make_dirs(config.out);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  const std::string base = fmt::format("{}-{}-{:%Y%m%d-%H%M%S}", config.experiment, to_string(config.command),
                                       fmt::localtime(now));
  for (int n = 0;; ++n) {
    const fs::path p = config.out / (n == 0 ? base : fmt::format("{}-{}", base, n));
    std::error_code ec;
    if (fs::create_directory(p, ec)) return p;
    if (ec) throw IoError("cannot create " + p.string() + ": " + ec.message());
  }
}

std::vector<fs::path> collect_pngs(const fs::path& path) {
  if (!fs::is_directory(path)) return {path};
  const fs::path dir = fs::is_directory(path / "images") ? path / "images" : path;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && ext == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no PNG images in " + dir.string());
  return files;
}

void run_command(const RunConfig& config, const std::string& config_text, const fs::path& run_dir,
                 std::ostream& out, std::ostream& log) {
  write_text(run_dir / "config.ini", config_text);
  {
    std::ofstream f(run_dir / "resolved.ini", std::ios::binary);
    boost::property_tree::write_ini(f, config.tree);
  }
  switch (config.command) {
    case Command::synth: return cmd_synth(config, run_dir, out);
    case Command::train: return cmd_train(config, run_dir, out, log);
    case Command::eval: return cmd_eval(config, run_dir, out, log);
    case Command::segment: return cmd_segment(config, run_dir, out, log);
    case Command::slic: return cmd_slic(config, run_dir, out, log);
    case Command::transfer_experiment: return cmd_transfer(config, run_dir, out, log);
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DivergenceError*>(&e)) return 4;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ShapeError*>(&e))
    return 3;
  return 1;
}

}  // namespace rootnet::cli
