// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/training.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rootnet/hash.hpp"
#include "rootnet/optim.hpp"

namespace rootnet {

void TrainConfig::validate() const {
  arch.validate();
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must not be negative");
  if (!(pos_weight > 0.0) || !std::isfinite(pos_weight)) {
    throw ConfigError("pos_weight must be positive");
  }
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (bins < 2) throw ConfigError("bins must be at least 2");
}

TrainConfig peanut_recipe(int depth, int base_width) {
  TrainConfig c;
  c.arch.variant = Variant::generic;
  c.arch.depth = depth;
  c.arch.base_width = base_width;
  c.lr = 1e-4;
  c.momentum = 0.8;
  c.batch_size = 2;
  c.epochs = 100;
  c.pos_weight = 1.0;
  return c;
}

TrainConfig switchgrass_recipe(bool pretrained, int base_width) {
  TrainConfig c;
  c.arch = vgg13_spec(base_width);
  c.lr = pretrained ? 1e-5 : 5e-5;
  c.momentum = 0.8;
  c.batch_size = 2;
  c.epochs = 300;
  c.pos_weight = 20.0;
  return c;
}

ScoreHistogram evaluate(const ArchSpec& spec, const ParamSet& params, const SampleSet& set,
                        std::size_t bins) {
  ScoreHistogram h(bins);
  for (const auto& r : set) {
    const Tensor probs = forward(spec, params, image_to_tensor(r.image));
    h.accumulate(probs.data(), std::span<const std::uint8_t>(r.mask.data));
  }
  return h;
}

Snapshot summarize_histogram(const ScoreHistogram& h, int epoch) {
  return {epoch, roc_curve(h).auc, pr_curve(h).auc};
}

TrialReport train(const TrainConfig& config, ParamSet params, const SampleSet& train_set,
                  const SampleSet& eval_set, const TrainHooks& hooks) {
  config.validate();
  check_params(config.arch, params);
  if (train_set.empty()) throw ValidationError("train: empty training set");
  if (eval_set.empty()) throw ValidationError("train: empty evaluation set");

  TrialReport report;
  report.seed = config.seed;
  report.snapshots.push_back(
      summarize_histogram(evaluate(config.arch, params, eval_set, config.bins), 0));

  std::vector<OptState<float>> states;
  states.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    states.emplace_back(static_cast<float>(config.lr), static_cast<float>(config.momentum));
  }
  std::mt19937_64 rng(mix_seed(config.seed, fnv1a("shuffle")));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  const auto pw = static_cast<float>(config.pos_weight);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int b = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch, ++b) {
      const std::size_t end = std::min(order.size(), begin + batch);
      Tensor input, target;
      make_batch(train_set, order, begin, end, input, target);
      Tape<float> tape;
      const Var logits = forward_logits(tape, config.arch, params, tape.constant(std::move(input)));
      const Var loss = tape.weighted_bce(logits, target, pw);
      const double l = tape.scalar(loss);
      if (!std::isfinite(l)) {
        throw DivergenceError(epoch, b,
                              fmt::format("loss became non-finite at epoch {} batch {}", epoch, b));
      }
      tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) {
        sgd_momentum_step(params[i].tensor, states[i]);
        if (!all_finite<float>(params[i].tensor.data())) {
          throw DivergenceError(epoch, b,
                                fmt::format("parameter {} became non-finite at epoch {} batch {}",
                                            params[i].name, epoch, b));
        }
      }
      loss_sum += l * static_cast<double>(end - begin);
    }
    report.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    const bool stop = hooks.after_epoch && hooks.after_epoch(report, params);
    if (epoch % config.eval_every == 0 || epoch == config.epochs || stop) {
      report.snapshots.push_back(
          summarize_histogram(evaluate(config.arch, params, eval_set, config.bins), epoch));
    }
    if (stop) break;
  }
  report.params = std::move(params);
  return report;
}

TrialReport train(const TrainConfig& config, const SampleSet& train_set, const SampleSet& eval_set,
                  const TrainHooks& hooks) {
  config.validate();
  return train(config, build(config.arch, config.seed), train_set, eval_set, hooks);
}

TrialSummary summarize(const std::vector<TrialReport>& reports) {
  TrialSummary s;
  s.trials = reports.size();
  if (reports.empty()) return s;
  s.single_trial = reports.size() == 1;
  auto mean_std = [&](auto get, double& mean, double& sd) {
    const double first = get(reports.front().final_snapshot());
    double shift = 0.0;
    for (const auto& r : reports) shift += get(r.final_snapshot()) - first;
    mean = first + shift / static_cast<double>(reports.size());
    sd = 0.0;
    if (reports.size() < 2) return;
    double ss = 0.0;
    for (const auto& r : reports) {
      const double d = get(r.final_snapshot()) - mean;
      ss += d * d;
    }
    sd = std::sqrt(ss / static_cast<double>(reports.size() - 1));
  };
  mean_std([](const Snapshot& x) { return x.roc_auc; }, s.mean_roc_auc, s.std_roc_auc);
  mean_std([](const Snapshot& x) { return x.pr_auc; }, s.mean_pr_auc, s.std_pr_auc);
  return s;
}

TrialsResult run_trials(const TrainConfig& config, int n_trials, const SampleSet& train_set,
                        const SampleSet& eval_set, const InitFn& init, const TrainHooks& hooks) {
  if (n_trials < 1) throw ConfigError("trials must be at least 1");
  config.validate();
  TrialsResult out;
  for (int t = 0; t < n_trials; ++t) {
    TrainConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(t);
    ParamSet p = init ? init(c.seed) : build(c.arch, c.seed);
    out.reports.push_back(train(c, std::move(p), train_set, eval_set, hooks));
  }
  out.summary = summarize(out.reports);
  return out;
}

std::vector<std::uint8_t> binarize(std::span<const float> probs, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError(fmt::format("binarize: threshold {} is outside (0, 1)", threshold));
  }
  std::vector<std::uint8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out[i] = static_cast<double>(probs[i]) >= threshold ? 1 : 0;
  return out;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<TrialReport>& reports) {
  try {
    auto out = fmt::output_file(path.string());
    out.print("trial,epoch,loss,roc_auc,pr_auc\n");
    for (std::size_t t = 0; t < reports.size(); ++t) {
      const auto& r = reports[t];
      std::size_t s = 0;
      const int last = static_cast<int>(r.epoch_loss.size());
      for (int e = 0; e <= last; ++e) {
        std::string loss = e >= 1 ? fmt::format("{:.9g}", r.epoch_loss[e - 1]) : "";
        while (s < r.snapshots.size() && r.snapshots[s].epoch < e) ++s;
        if (s < r.snapshots.size() && r.snapshots[s].epoch == e) {
          out.print("{},{},{},{:.9g},{:.9g}\n", t, e, loss, r.snapshots[s].roc_auc,
                    r.snapshots[s].pr_auc);
        } else {
          out.print("{},{},{},,\n", t, e, loss);
        }
      }
    }
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<ModelSummary>& rows) {
  try {
    auto out = fmt::output_file(path.string());
    out.print("model,mean_roc_auc,std_roc_auc,mean_pr_auc,std_pr_auc\n");
    for (const auto& r : rows) {
      out.print("{},{:.9g},{:.9g},{:.9g},{:.9g}\n", r.model, r.summary.mean_roc_auc,
                r.summary.std_roc_auc, r.summary.mean_pr_auc, r.summary.std_pr_auc);
    }
  } catch (const std::system_error& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
}

std::string format_summary_table(const std::vector<ModelSummary>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.model.size());
  std::string out = fmt::format("{:<{}}  {:<17}  {:<17}\n", "Model", width, "ROC-AUC", "PR-AUC");
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out += fmt::format("{:<{}}  {:.4f} ± {:.4f}{}  {:.4f} ± {:.4f}\n", r.model, width,
                       s.mean_roc_auc, s.std_roc_auc, s.single_trial ? "*" : " ", s.mean_pr_auc,
                       s.std_pr_auc);
  }
  if (std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.summary.single_trial; }))
    out += "* single trial, deviation reported as 0\n";
  return out;
}

}  // namespace rootnet
