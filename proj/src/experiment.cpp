// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/core.h>
#include <fmt/os.h>

#include "rootnet/errors.hpp"

namespace rootnet {

namespace fs = std::filesystem;

void TransferExperimentConfig::validate() const {
  if (base_width < 1) throw ConfigError("base_width must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (regimes.empty()) throw ConfigError("no regimes selected");
  for (std::size_t i = 0; i < regimes.size(); ++i)
    for (std::size_t j = i + 1; j < regimes.size(); ++j)
      if (regimes[i] == regimes[j]) throw ConfigError("regime " + regime_label(regimes[i]) + " listed twice");
  if (!(lr_scale > 0.0) || !std::isfinite(lr_scale)) throw ConfigError("lr_scale must be positive");
  for (InitKind k : regimes) target_config(k).validate();
  if (needs(InitKind::encoder_from_checkpoint) || needs(InitKind::encoder_decoder_from_checkpoint)) {
    if (source_checkpoint.empty()) {
      source_config().validate();
      if (!(source_train_fraction > 0.0 && source_train_fraction < 1.0))
        throw ConfigError("source_train_fraction must lie in (0, 1)");
    }
  }
  if (needs(InitKind::encoder_from_classifier) && classifier_checkpoint.empty()) {
    if (classifier_data.classes < 2 || classifier_data.classes > 4)
      throw ConfigError("classifier classes must lie in [2, 4]");
    if (classifier_data.per_class < 1) throw ConfigError("classifier per_class must be >= 1");
    if (classifier_data.patch < 32 || classifier_data.patch % 32 != 0)
      throw ConfigError("classifier patch must be a positive multiple of 32");
    if (classifier.epochs < 0 || classifier.batch_size < 1 || !(classifier.lr > 0.0))
      throw ConfigError("invalid classifier training settings");
  }
}

bool TransferExperimentConfig::needs(InitKind kind) const {
  return std::find(regimes.begin(), regimes.end(), kind) != regimes.end();
}

TrainConfig TransferExperimentConfig::target_config(InitKind kind) const {
  TrainConfig c;
  c.arch = vgg13_spec(base_width);
  c.lr = (kind == InitKind::scratch ? scratch_lr : pretrained_lr) * lr_scale;
  c.momentum = momentum;
  c.batch_size = batch_size;
  c.epochs = epochs;
  c.pos_weight = pos_weight;
  c.seed = seed;
  c.eval_every = 1;
  c.bins = bins;
  return c;
}

TrainConfig TransferExperimentConfig::source_config() const {
  TrainConfig c;
  c.arch = vgg13_spec(base_width);
  c.lr = source_lr;
  c.momentum = source_momentum;
  c.batch_size = batch_size;
  c.epochs = source_epochs;
  c.pos_weight = source_pos_weight;
  c.seed = source_seed;
  c.eval_every = std::max(1, source_epochs);
  c.bins = bins;
  return c;
}

const RegimeResult* TransferExperimentResult::find(InitKind kind) const {
  for (const auto& r : regimes)
    if (r.kind == kind) return &r;
  return nullptr;
}

TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config,
                                                 const SampleSet& source_set,
                                                 const SampleSet& target_train,
                                                 const SampleSet& target_eval,
                                                 const ProgressFn& progress) {
  config.validate();
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };
  TransferExperimentResult out;
  const ArchSpec arch = vgg13_spec(config.base_width);

  if (config.needs(InitKind::encoder_from_checkpoint) ||
      config.needs(InitKind::encoder_decoder_from_checkpoint)) {
    if (!config.source_checkpoint.empty()) {
      out.source_checkpoint = load_checkpoint(config.source_checkpoint);
      if (out.source_checkpoint.kind != ModelKind::unet || !(out.source_checkpoint.spec == arch))
        throw ConfigError("source checkpoint " + config.source_checkpoint.string() +
                          fmt::format(" is not a vgg13 base-{} segmentation model", config.base_width));
    } else {
      const Split split =
          stratified_split(source_set, config.source_train_fraction, config.source_split_seed);
      note(fmt::format("pre-training on {} source images ({} held out)", split.train.size(),
                       split.test.size()));
      TrialReport r = train(config.source_config(), split.train, split.test);
      note(fmt::format("source model ROC-AUC {:.4f}", r.final_snapshot().roc_auc));
      out.source_checkpoint.kind = ModelKind::unet;
      out.source_checkpoint.spec = arch;
      out.source_checkpoint.params = r.params;
      out.source = std::move(r);
    }
  }

  if (config.needs(InitKind::encoder_from_classifier)) {
    if (!config.classifier_checkpoint.empty()) {
      out.classifier_checkpoint = load_checkpoint(config.classifier_checkpoint);
      if (out.classifier_checkpoint.kind != ModelKind::classifier)
        throw ConfigError(config.classifier_checkpoint.string() + " is not a classifier checkpoint");
    } else {
      ClassifierTrainConfig cc = config.classifier;
      cc.spec.base_width = config.base_width;
      cc.spec.classes = config.classifier_data.classes;
      note(fmt::format("training the surrogate classifier on {} patches",
                       config.classifier_data.classes * config.classifier_data.per_class));
      ClassifierReport r = train_surrogate_classifier(gen_classification_set(config.classifier_data), cc);
      note(fmt::format("surrogate classifier accuracy {:.3f}", r.accuracy));
      out.classifier_checkpoint = r.checkpoint;
      out.classifier = std::move(r);
    }
  }

  for (InitKind kind : config.regimes) {
    const TrainConfig tc = config.target_config(kind);
    const Checkpoint* src = kind == InitKind::encoder_from_classifier ? &out.classifier_checkpoint
                            : kind == InitKind::scratch               ? nullptr
                                                                      : &out.source_checkpoint;
    InitFn init = [&](std::uint64_t s) { return init_model(arch, kind, src, s).params; };
    note(fmt::format("{}: {} trials x {} epochs at lr {:.3g}", model_label(kind), config.trials,
                     tc.epochs, tc.lr));
    RegimeResult rr{kind, run_trials(tc, config.trials, target_train, target_eval, init)};
    note(fmt::format("{}: ROC-AUC {:.4f} ± {:.4f}", model_label(kind), rr.trials.summary.mean_roc_auc,
                     rr.trials.summary.std_roc_auc));
    out.regimes.push_back(std::move(rr));
  }
  return out;
}

TransferExperimentResult run_transfer_experiment(const TransferExperimentConfig& config,
                                                 const DomainPair& pair,
                                                 const ProgressFn& progress) {
  return run_transfer_experiment(config, pair.source, pair.target_train, pair.target_eval, progress);
}

std::string model_label(InitKind kind) { return regime_label(kind) + "-model"; }

std::vector<ModelSummary> transfer_summary(const TransferExperimentResult& result) {
  std::vector<ModelSummary> rows;
  for (InitKind k : {InitKind::scratch, InitKind::encoder_from_classifier, InitKind::encoder_from_checkpoint,
                     InitKind::encoder_decoder_from_checkpoint}) {
    if (const RegimeResult* r = result.find(k)) rows.push_back({model_label(k), r->trials.summary});
  }
  return rows;
}

namespace {

std::vector<double> mean_curve(const TrialsResult& t, bool pr) {
  std::vector<double> curve;
  for (const auto& rep : t.reports) {
    if (curve.empty()) curve.assign(rep.snapshots.size(), 0.0);
    if (rep.snapshots.size() != curve.size()) throw ConfigError("trials differ in snapshot count");
    for (std::size_t i = 0; i < curve.size(); ++i)
      curve[i] += pr ? rep.snapshots[i].pr_auc : rep.snapshots[i].roc_auc;
  }
  for (auto& v : curve) v /= static_cast<double>(t.reports.size());
  return curve;
}

int first_reach(const std::vector<Snapshot>& snaps, double target) {
  for (const auto& s : snaps)
    if (s.roc_auc >= target) return s.epoch;
  return -1;
}

}  // namespace

OrderingReport check_transfer_ordering(const TransferExperimentResult& result) {
  const RegimeResult* s = result.find(InitKind::scratch);
  const RegimeResult* en = result.find(InitKind::encoder_from_checkpoint);
  const RegimeResult* ende = result.find(InitKind::encoder_decoder_from_checkpoint);
  if (!s || !en || !ende) throw ConfigError("ordering check needs the S, P-En and P-EnDe regimes");
  const std::size_t n = s->trials.reports.size();
  if (n == 0 || en->trials.reports.size() != n || ende->trials.reports.size() != n)
    throw ConfigError("ordering check needs equal, non-zero trial counts");

  OrderingReport rep;
  rep.epochs = s->trials.reports[0].final_snapshot().epoch;
  for (std::size_t t = 0; t < n; ++t) {
    GroupOrdering g;
    g.trial = static_cast<int>(t);
    g.scratch = s->trials.reports[t].final_snapshot().roc_auc;
    g.encoder = en->trials.reports[t].final_snapshot().roc_auc;
    g.encoder_decoder = ende->trials.reports[t].final_snapshot().roc_auc;
    g.reach_epoch = first_reach(ende->trials.reports[t].snapshots, g.scratch);
    g.ordered = g.encoder_decoder >= g.encoder && g.encoder >= g.scratch;
    g.fast = g.reach_epoch >= 0 && 2 * g.reach_epoch <= rep.epochs;
    rep.groups_ok += g.ordered && g.fast;
    rep.mean_scratch += g.scratch / static_cast<double>(n);
    rep.mean_encoder += g.encoder / static_cast<double>(n);
    rep.mean_encoder_decoder += g.encoder_decoder / static_cast<double>(n);
    rep.groups.push_back(g);
  }
  rep.means_ordered = rep.mean_encoder_decoder >= rep.mean_encoder && rep.mean_encoder >= rep.mean_scratch;
  const auto s_curve = mean_curve(s->trials, false);
  const auto ende_curve = mean_curve(ende->trials, false);
  const auto& epochs_of = ende->trials.reports[0].snapshots;
  for (std::size_t i = 0; i < ende_curve.size(); ++i) {
    if (ende_curve[i] >= s_curve.back()) {
      rep.mean_reach_epoch = epochs_of[i].epoch;
      break;
    }
  }
  rep.means_fast = rep.mean_reach_epoch >= 0 && 2 * rep.mean_reach_epoch <= rep.epochs;
  return rep;
}

std::string format_ordering(const OrderingReport& r) {
  std::string out = fmt::format("{:<7} {:>8} {:>8} {:>8} {:>6}  ok\n", "group", "S", "P-En", "P-EnDe", "reach");
  for (const auto& g : r.groups) {
    out += fmt::format("{:<7} {:>8.4f} {:>8.4f} {:>8.4f} {:>6} {}\n", g.trial, g.scratch, g.encoder,
                       g.encoder_decoder, g.reach_epoch, g.ordered && g.fast ? "yes" : "no");
  }
  out += fmt::format("{:<7} {:>8.4f} {:>8.4f} {:>8.4f} {:>6} {}\n", "mean", r.mean_scratch, r.mean_encoder,
                     r.mean_encoder_decoder, r.mean_reach_epoch, r.means_ordered && r.means_fast ? "yes" : "no");
  out += fmt::format("groups holding: {} of {} (epochs {})\n", r.groups_ok, r.groups.size(), r.epochs);
  return out;
}

void write_transfer_curves_csv(const fs::path& path, const TransferExperimentResult& result) {
  try {
    auto out = fmt::output_file(path.string());
    out.print("regime,trial,epoch,roc_auc,pr_auc\n");
    for (const auto& r : result.regimes)
      for (std::size_t t = 0; t < r.trials.reports.size(); ++t)
        for (const auto& s : r.trials.reports[t].snapshots)
          out.print("{},{},{},{:.17g},{:.17g}\n", regime_label(r.kind), t, s.epoch, s.roc_auc, s.pr_auc);
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

void write_transfer_curves_svg(const fs::path& path, const TransferExperimentResult& result, bool pr) {
  constexpr double kW = 480.0, kH = 300.0, kMargin = 50.0;
  constexpr std::array<const char*, 4> kColors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"};
  int max_epoch = 1;
  for (const auto& r : result.regimes)
    for (const auto& rep : r.trials.reports) max_epoch = std::max(max_epoch, rep.final_snapshot().epoch);
  try {
    auto out = fmt::output_file(path.string());
    out.print("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
              "font-family=\"sans-serif\" font-size=\"12\">\n",
              kW + 2 * kMargin + 110, kH + 2 * kMargin);
    out.print("<rect x=\"{0}\" y=\"{0}\" width=\"{1}\" height=\"{2}\" fill=\"none\" stroke=\"#444\"/>\n",
              kMargin, kW, kH);
    out.print("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} per epoch (trial mean)</text>\n",
              kMargin + kW / 2, kMargin / 2, pr ? "PR-AUC" : "ROC-AUC");
    out.print("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">epoch (0 to {})</text>\n", kMargin + kW / 2,
              kH + 1.7 * kMargin, max_epoch);
    for (std::size_t i = 0; i < result.regimes.size(); ++i) {
      const auto& r = result.regimes[i];
      const auto curve = mean_curve(r.trials, pr);
      const auto& snaps = r.trials.reports[0].snapshots;
      std::string pts;
      for (std::size_t k = 0; k < curve.size(); ++k) {
        pts += fmt::format("{:.2f},{:.2f} ", kMargin + kW * snaps[k].epoch / max_epoch,
                           kMargin + (1.0 - curve[k]) * kH);
      }
      const char* color = kColors[static_cast<std::size_t>(r.kind) % kColors.size()];
      out.print("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color, pts);
      out.print("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", kMargin + kW + 10, kMargin + 16 * (i + 1),
                color, model_label(r.kind));
    }
    out.print("</svg>\n");
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

}  // namespace rootnet
