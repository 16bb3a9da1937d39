// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. `acceptance N` runs criterion N, `acceptance all` runs
// every criterion. Each prints one line: "criterion N: PASS|FAIL (details)".

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cli/app.hpp"
#include "rootnet/experiment.hpp"
#include "rootnet/gradcheck.hpp"
#include "rootnet/metrics.hpp"
#include "rootnet/superpixel.hpp"
#include "rootnet/synthgen.hpp"
#include "rootnet/training.hpp"
#include "rootnet/transfer.hpp"
#include "rootnet/unet.hpp"

namespace fs = std::filesystem;
using namespace rootnet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const std::string& s) { std::cerr << "  " << s << '\n' << std::flush; }

TensorD random_tensor(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  TensorD t(s);
  for (double& v : t.data()) v = u(rng);
  return t;
}

// 1. Finite-difference gradients.

Outcome gradients() {
  const Stopwatch clock;
  double worst_primitive = 0.0, worst_loss = 0.0;
  std::string worst_what;
  std::size_t checked = 0;
  int configs = 0;
  GradCheckOptions opts;
  opts.max_coords = 40;

  for (int seed = 1; seed <= 20; ++seed, ++configs) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_int_distribution<int> ext(1, 4), ch(1, 4);
    const std::int64_t n = 1 + seed % 2, c = ch(rng), co = ch(rng);
    const std::int64_t h = 2 * ext(rng), w = 2 * ext(rng);
    const Shape s{n, c, h, w};
    opts.seed = static_cast<std::uint64_t>(seed);

    auto run = [&](const char* what, std::vector<TensorD> in, const GradCheckFn& fn, bool loss) {
      const GradCheckReport rep = grad_check(fn, in, opts);
      checked += rep.checked;
      double& slot = loss ? worst_loss : worst_primitive;
      if (rep.checked == 0) slot = std::max(slot, 1.0);
      if (rep.max_rel_error > slot) {
        slot = rep.max_rel_error;
        worst_what = fmt::format("{} {}: {}", what, to_string(s), rep.worst);
      }
    };
    auto proj = [&](Shape out) { return random_tensor(out, rng); };

    const TensorD r0 = proj({n, co, h, w});
    run("conv3x3", {random_tensor(s, rng), random_tensor({co, c, 3, 3}, rng), random_tensor({co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.conv3x3(v[0], v[1], v[2]), r0); }, false);
    const TensorD r1 = proj({n, co, h, w});
    run("conv1x1", {random_tensor(s, rng), random_tensor({co, c, 1, 1}, rng), random_tensor({co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.conv1x1(v[0], v[1], v[2]), r1); }, false);
    const TensorD r2 = proj(s);
    run("relu", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.relu(v[0]), r2); }, false);
    const TensorD r3 = proj({n, c, h / 2, w / 2});
    run("maxpool2", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.maxpool2(v[0]), r3); }, false);
    const TensorD r4 = proj({n, co, 2 * h, 2 * w});
    run("transpose_conv2",
        {random_tensor(s, rng), random_tensor({c, co, 2, 2}, rng), random_tensor({co, 1, 1, 1}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.transpose_conv2(v[0], v[1], v[2]), r4); },
        false);
    const TensorD r5 = proj({n, c + co, h, w});
    run("concat", {random_tensor(s, rng), random_tensor({n, co, h, w}, rng)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.concat(v[0], v[1]), r5); }, false);
    const TensorD r6 = proj(s);
    run("sigmoid", {random_tensor(s, rng, -6.0, 6.0)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.project(t.sigmoid(v[0]), r6); }, false);
    const TensorD r7 = proj({n, c, h + 3, w + 1});
    run("pad_crop", {random_tensor(s, rng)},
        [&](Tape<double>& t, std::span<const Var> v) {
          return t.project(t.crop_top_left(t.pad_bottom_right(v[0], h + 5, w + 2), h + 3, w + 1), r7);
        },
        false);

    TensorD target({n, 1, h, w});
    std::bernoulli_distribution coin(0.3);
    for (double& v : target.data()) v = coin(rng) ? 1.0 : 0.0;
    const double pw = 1.0 + seed % 20;
    run("weighted_bce", {random_tensor({n, 1, h, w}, rng, -5.0, 5.0)},
        [&](Tape<double>& t, std::span<const Var> v) { return t.weighted_bce(v[0], target, pw); }, true);
  }

  // Depth-2 network end to end.
  ArchSpec spec;
  spec.depth = 2;
  spec.base_width = 2;
  const ParamSet p = build(spec, 9);
  std::vector<TensorD> inputs;
  for (const auto& np : p) {
    TensorD t = tensor_cast<double>(np.tensor);
    if (np.name.ends_with(".bias"))
      for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = 0.01 * static_cast<double>(i + 1);
    inputs.push_back(std::move(t));
  }
  std::mt19937_64 rng(21);
  const TensorD x = random_tensor({1, 3, 8, 8}, rng, -0.5, 0.5);
  const TensorD r = random_tensor({1, 1, 8, 8}, rng);
  GradCheckOptions net_opts;
  net_opts.max_coords = 12;
  net_opts.seed = 3;
  const GradCheckReport net = grad_check(
      [&](Tape<double>& tape, std::span<const Var> vars) {
        auto param = [&](std::size_t k) { return vars[k]; };
        return tape.project(unet_logits(tape, spec, param, tape.constant(x)), r);
      },
      inputs, net_opts);

  const double secs = clock.seconds();
  const bool pass = configs >= 20 && worst_primitive <= 1e-4 && worst_loss <= 1e-5 && net.checked > 0 &&
                    net.max_rel_error <= 1e-3 && secs < 120.0;
  return {pass, fmt::format("{} configs, {} coords; primitives {:.2e} (<= 1e-4), loss {:.2e} (<= 1e-5), "
                            "depth-2 network {:.2e} over {} coords (<= 1e-3); {:.1f}s{}",
                            configs, checked, worst_primitive, worst_loss, net.max_rel_error, net.checked, secs,
                            worst_what.empty() ? "" : "; worst " + worst_what)};
}

// 2. Same-size contract.

Outcome same_size() {
  const Stopwatch clock;
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> ext(16, 800);
  std::vector<std::pair<std::int64_t, std::int64_t>> sizes;
  for (int i = 0; i < 50; ++i) sizes.emplace_back(ext(rng), ext(rng));
  sizes.emplace_back(580, 760);
  sizes.emplace_back(760, 580);
  sizes.emplace_back(1560, 2160);
  sizes.emplace_back(2160, 1560);
  int runs = 0, bad = 0;
  std::string first_bad;
  for (int depth : {4, 5, 6}) {
    ArchSpec spec;
    spec.depth = depth;
    spec.base_width = 4;
    const ParamSet params = build(spec, static_cast<std::uint64_t>(depth));
    for (const auto& [h, w] : sizes) {
      Tensor x(Shape{1, 3, h, w}, 0.1f);
      const Tensor y = forward(spec, params, x);
      ++runs;
      if (y.shape() != Shape{1, 1, h, w}) {
        ++bad;
        if (first_bad.empty()) first_bad = fmt::format("depth {} {}x{} -> {}", depth, h, w, to_string(y.shape()));
      }
    }
  }
  const double secs = clock.seconds();
  return {bad == 0 && secs < 300.0,
          fmt::format("{} forwards over 50 random sizes plus 760x580 and 2160x1560, depths 4/5/6, base 4; "
                      "{} mismatches; {:.1f}s (< 300s){}",
                      runs, bad, secs, first_bad.empty() ? "" : "; first " + first_bad)};
}

// 3. Memorization probe.

Outcome memorization() {
  const Stopwatch clock;
  GenParams g;
  g.seed = 42;
  const SampleSet set = gen_sample_set(g, 8, "m");
  TrainConfig c;
  c.arch.depth = 4;
  c.arch.base_width = 8;
  c.lr = 1e-3;
  c.momentum = 0.95;
  c.batch_size = 1;
  c.epochs = 200;
  c.eval_every = 10;
  c.seed = 1;
  c.bins = kDefaultBins;
  double best = 0.0;
  int reached = -1;
  TrainHooks hooks;
  hooks.after_epoch = [&](const TrialReport& r, const ParamSet& params) {
    const int epoch = static_cast<int>(r.epoch_loss.size());
    if (epoch % 10 != 0) return false;
    const Snapshot s = summarize_histogram(evaluate(c.arch, params, set, c.bins), epoch);
    best = std::max(best, s.roc_auc);
    note(fmt::format("epoch {} loss {:.5f} training ROC-AUC {:.5f}", epoch, r.epoch_loss.back(), s.roc_auc));
    if (s.roc_auc >= 0.995) {
      reached = epoch;
      return true;
    }
    return false;
  };
  TrainConfig quiet = c;
  quiet.eval_every = c.epochs;
  const TrialReport r = train(quiet, set, set, hooks);
  const double final_auc = r.final_snapshot().roc_auc;
  best = std::max(best, final_auc);
  if (reached < 0 && final_auc >= 0.995) reached = static_cast<int>(r.epoch_loss.size());
  const double secs = clock.seconds();
  return {reached > 0 && reached <= 200 && secs < 600.0,
          fmt::format("8 images 192x192, depth 4 base 8, 1 thread: training ROC-AUC {:.5f} (>= 0.995) "
                      "reached at epoch {} (<= 200); {:.1f}s (< 600s)",
                      best, reached, secs)};
}

// 4. Histogram metrics against the exact oracle.

Outcome metrics_oracle() {
  const Stopwatch clock;
  const std::size_t n = 1'000'000;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<float> scores(n);
  std::vector<double> scores_d(n);
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = u(rng) < 0.1 ? 1 : 0;
    const double s = std::clamp(0.35 * u(rng) + (labels[i] ? 0.3 : 0.0) + 0.3 * u(rng), 0.0, 1.0);
    scores[i] = static_cast<float>(s);
    scores_d[i] = static_cast<double>(scores[i]);
  }
  ScoreHistogram whole;
  whole.accumulate(scores, labels);
  const double roc = roc_curve(whole).auc, pr = pr_curve(whole).auc;
  const ExactAuc exact = exact_auc(scores_d, labels);
  const double d_roc = std::abs(roc - exact.roc_auc), d_pr = std::abs(pr - exact.pr_auc);

  ScoreHistogram merged;
  const std::size_t shards = 7;
  for (std::size_t k = 0; k < shards; ++k) {
    const std::size_t b = n * k / shards, e = n * (k + 1) / shards;
    ScoreHistogram part;
    part.accumulate(std::span(scores).subspan(b, e - b), std::span(labels).subspan(b, e - b));
    merged = merge(merged, part);
  }
  const bool shard_equal = merged == whole;

  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const std::size_t big = 20'000'000;
  std::vector<float> s2(big);
  std::vector<std::uint8_t> l2(big);
  for (std::size_t i = 0; i < big; ++i) {
    s2[i] = scores[i % n];
    l2[i] = labels[i % n];
  }
  double best_rate = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    ScoreHistogram h;
    const Stopwatch t;
    h.accumulate(s2, l2);
    best_rate = std::max(best_rate, static_cast<double>(big) / t.seconds());
  }
  omp_set_num_threads(threads);

  const double secs = clock.seconds();
  const bool pass = d_roc <= 2e-4 && d_pr <= 2e-4 && shard_equal && best_rate >= 1e8 && secs < 60.0;
  return {pass, fmt::format("1e6 scores: |dROC| {:.2e}, |dPR| {:.2e} (<= 2e-4); 7-shard merge {}; "
                            "accumulate {:.3g} px/s on 1 thread (>= 1e8); {:.1f}s (< 60s)",
                            d_roc, d_pr, shard_equal ? "identical" : "DIFFERS", best_rate, secs)};
}

// 5. Threshold at a target FPR.

Outcome fpr_threshold() {
  const Stopwatch clock;
  int cases = 0, bad = 0;
  std::string first_bad;
  for (int dist = 0; dist < 4; ++dist) {
    for (std::size_t bins : {std::size_t{256}, std::size_t{4096}, kDefaultBins}) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(50 + dist));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const std::size_t n = 200'000;
      std::vector<float> scores(n);
      std::vector<std::uint8_t> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = u(rng) < 0.05 ? 1 : 0;
        double s = u(rng);
        if (dist == 1) s = s * s * s;                             // mass near 0
        if (dist == 2) s = std::round(s * 20.0) / 20.0;           // heavy ties
        if (dist == 3) s = labels[i] ? 0.5 + 0.5 * s : 0.6 * s;   // separable
        scores[i] = static_cast<float>(std::clamp(s, 0.0, 1.0));
      }
      ScoreHistogram h(bins);
      h.accumulate(scores, labels);
      for (double target : {0.0, 0.001, 0.01, 0.05}) {
        const FprThreshold f = threshold_at_fpr(h, target);
        auto recount = [&](double thr) {
          std::uint64_t fp = 0, neg = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (labels[i]) continue;
            ++neg;
            fp += static_cast<double>(scores[i]) >= thr;
          }
          return static_cast<double>(fp) / static_cast<double>(neg);
        };
        const double fpr = recount(f.threshold);
        const bool within = fpr <= target && fpr == f.realized_fpr;
        const bool loosest = f.edge == 0 || recount(h.edge(f.edge - 1)) > target;
        ++cases;
        if (!within || !loosest) {
          ++bad;
          if (first_bad.empty())
            first_bad = fmt::format("dist {} B {} target {}: fpr {} edge {}", dist, bins, target, fpr, f.edge);
        }
      }
    }
  }
  const double secs = clock.seconds();
  return {bad == 0, fmt::format("{} (distribution, bins, target) cases recounted directly; {} violations; {:.1f}s{}",
                                cases, bad, secs, first_bad.empty() ? "" : "; first " + first_bad)};
}

// 6. Transfer ordering.

Outcome transfer_ordering() {
  const Stopwatch clock;
  DomainPairOptions o;
  o.size = 96;
  const DomainPair pair = gen_domain_pair(11, 12, o);
  const TransferExperimentConfig cfg;
  TransferExperimentConfig run = cfg;
  run.regimes = {InitKind::scratch, InitKind::encoder_from_checkpoint, InitKind::encoder_decoder_from_checkpoint};
  const TransferExperimentResult r = run_transfer_experiment(run, pair, [&](const std::string& s) {
    note(fmt::format("[{:.0f}s] {}", clock.seconds(), s));
  });
  const OrderingReport ord = check_transfer_ordering(r);
  std::cerr << format_ordering(ord);
  const double secs = clock.seconds();
  return {ord.pass(4) && ord.epochs <= 50 && secs < 3600.0,
          fmt::format("{} source / {}+{} target images, 5 trials x {} epochs, base 8, lr S {:.0e} P {:.0e}: "
                      "means S {:.4f} P-En {:.4f} P-EnDe {:.4f} ({}); mean P-EnDe reaches S final at epoch {} "
                      "(<= {}); {} of 5 seed groups ordered and fast (>= 4); {:.0f}s (< 3600s)",
                      pair.source.size(), pair.target_train.size(), pair.target_eval.size(), ord.epochs,
                      cfg.scratch_lr * cfg.lr_scale, cfg.pretrained_lr * cfg.lr_scale, ord.mean_scratch,
                      ord.mean_encoder, ord.mean_encoder_decoder, ord.means_ordered ? "ordered" : "NOT ordered",
                      ord.mean_reach_epoch, ord.epochs / 2, ord.groups_ok, secs)};
}

// 7. Weight surgery.

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()) == 0;
}

Outcome weight_surgery() {
  const Stopwatch clock;
  int violations = 0;
  std::string first;
  auto fail = [&](const std::string& s) {
    if (first.empty()) first = s;
    ++violations;
  };

  const ArchSpec spec = vgg13_spec(4);
  Checkpoint source;
  source.spec = spec;
  source.params = build(spec, 100);
  ClassifierSpec cs;
  cs.base_width = 4;
  Checkpoint cls;
  cls.kind = ModelKind::classifier;
  cls.classifier = cs;
  cls.params = build_classifier(cs, 200);
  const ParamSet scratch = build(spec, 7);

  int classifier_copies = 0;
  for (InitKind kind : {InitKind::scratch, InitKind::encoder_from_classifier, InitKind::encoder_from_checkpoint,
                        InitKind::encoder_decoder_from_checkpoint}) {
    const Checkpoint* src = kind == InitKind::encoder_from_classifier ? &cls
                            : kind == InitKind::scratch              ? nullptr
                                                                     : &source;
    const InitResult r = init_model(spec, kind, src, 7);
    if (r.provenance.size() != r.params.size()) fail(to_string(kind) + ": provenance size");
    for (std::size_t i = 0; i < r.params.size(); ++i) {
      const std::string& name = r.params[i].name;
      const Partition part = partition(name);
      bool expect_copy = false;
      switch (kind) {
        case InitKind::scratch: break;
        case InitKind::encoder_from_classifier:
          expect_copy = part == Partition::encoder && name.starts_with("enc");
          break;
        case InitKind::encoder_from_checkpoint: expect_copy = part == Partition::encoder; break;
        case InitKind::encoder_decoder_from_checkpoint: expect_copy = part != Partition::head; break;
      }
      const Provenance prov = r.provenance.at(name);
      if ((prov == Provenance::copied) != expect_copy) fail(to_string(kind) + ": provenance of " + name);
      if (kind == InitKind::encoder_from_classifier && prov == Provenance::copied) ++classifier_copies;
      if (!expect_copy && !bit_equal(r.params[i].tensor, scratch[i].tensor))
        fail(to_string(kind) + ": " + name + " differs from scratch");
      if (expect_copy && kind != InitKind::encoder_from_classifier &&
          !bit_equal(r.params[i].tensor, source.params[i].tensor))
        fail(to_string(kind) + ": " + name + " differs from source");
    }
  }
  const auto mapped = map_classifier_weights(cls, spec);
  if (mapped.size() != 20) fail(fmt::format("mapping copies {} tensors", mapped.size()));
  for (std::size_t k = 0; k < mapped.size() && k < 20; ++k)
    if (!bit_equal(mapped[k].tensor, cls.params[k].tensor)) fail("mapped tensor " + mapped[k].name);

  const fs::path dir = fs::temp_directory_path() / "rootnet_acceptance_7";
  fs::create_directories(dir);
  ParamSet odd = build(spec, 3);
  odd[0].tensor.data()[0] = -0.0f;
  odd[0].tensor.data()[1] = 1e-40f;
  odd[0].tensor.data()[2] = std::bit_cast<float>(0x7fc01234u);
  save(odd, spec, dir / "a.ckpt");
  const auto [back_spec, back] = load(dir / "a.ckpt");
  bool round_trip = back_spec == spec && back.size() == odd.size();
  for (std::size_t i = 0; round_trip && i < odd.size(); ++i)
    round_trip = back[i].name == odd[i].name && bit_equal(back[i].tensor, odd[i].tensor);
  save(back, back_spec, dir / "b.ckpt");
  auto bytes = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  round_trip = round_trip && bytes(dir / "a.ckpt") == bytes(dir / "b.ckpt");
  for (const auto& c : {cls}) {
    const Checkpoint parsed = parse_checkpoint(serialize_checkpoint(c));
    round_trip = round_trip && parsed.kind == ModelKind::classifier && serialize_checkpoint(parsed) == serialize_checkpoint(c);
  }
  if (!round_trip) fail("checkpoint round trip");
  fs::remove_all(dir);

  return {violations == 0 && classifier_copies == 20,
          fmt::format("4 init modes on vgg13 base 4: {} violations; classifier mapping copies {} tensors (20); "
                      "checkpoint round trip {}; {:.2f}s{}",
                      violations, classifier_copies, round_trip ? "bit-identical" : "BROKEN", clock.seconds(),
                      first.empty() ? "" : "; first " + first)};
}

// 8. SLIC properties.

bool connected_labels(const SuperpixelMap& m) {
  std::vector<char> seen(m.labels.size(), 0);
  std::set<int> started;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(m.labels.size()); ++i) {
    if (seen[i]) continue;
    const int id = m.labels[i];
    if (!started.insert(id).second) return false;
    std::vector<std::int64_t> stack{i};
    seen[i] = 1;
    while (!stack.empty()) {
      const std::int64_t p = stack.back();
      stack.pop_back();
      const std::int64_t y = p / m.width, x = p % m.width;
      const std::int64_t nb[4][2] = {{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= m.height || q[1] < 0 || q[1] >= m.width) continue;
        const std::int64_t k = q[0] * m.width + q[1];
        if (!seen[k] && m.labels[k] == id) {
          seen[k] = 1;
          stack.push_back(k);
        }
      }
    }
  }
  return static_cast<int>(started.size()) == m.count;
}

bool total_partition(const SuperpixelMap& m) {
  if (static_cast<std::int64_t>(m.labels.size()) != m.height * m.width) return false;
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(m.count), 0);
  for (int l : m.labels) {
    if (l < 0 || l >= m.count) return false;
    ++sizes[static_cast<std::size_t>(l)];
  }
  return std::all_of(sizes.begin(), sizes.end(), [](std::int64_t s) { return s > 0; });
}

Outcome slic_properties() {
  const Stopwatch clock;
  int checks = 0, bad = 0;
  std::string first;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++bad;
      if (first.empty()) first = what;
    }
  };
  double worst_area_dev = 0.0;
  for (std::int64_t side : {100, 150, 200, 333}) {
    for (std::uint8_t level : {40, 128, 220}) {
      const Image img(side, side, 3, level);
      const SuperpixelMap m = slic(img, {100, 10.0, 10});
      const double mean = static_cast<double>(side * side) / m.count;
      worst_area_dev = std::max(worst_area_dev, std::abs(mean / 100.0 - 1.0));
      expect(total_partition(m), fmt::format("uniform {} partition", side));
      expect(connected_labels(m), fmt::format("uniform {} connectivity", side));
      expect(std::abs(mean / 100.0 - 1.0) <= 0.2, fmt::format("uniform {} mean area {:.1f}", side, mean));
    }
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GenParams g;
    g.seed = seed;
    const GeneratedImage gi = gen_root_image(g);
    const SuperpixelMap m = slic(gi.image);
    expect(total_partition(m), fmt::format("synthetic {} partition", seed));
    expect(connected_labels(m), fmt::format("synthetic {} connectivity", seed));
    const Image snapped = snap_mask(gi.mask, m);
    expect(snap_mask(snapped, m) == snapped, fmt::format("synthetic {} snap idempotence", seed));
    const Image noisy_snap = snap_mask(degrade_to_winrhizo(gi.mask), m);
    expect(snap_mask(noisy_snap, m) == noisy_snap, fmt::format("synthetic {} degraded snap idempotence", seed));
  }
  const double secs = clock.seconds();
  return {bad == 0 && secs < 60.0,
          fmt::format("{} checks on uniform and synthetic images; worst mean-area deviation {:.1f}% (<= 20%); "
                      "{} failures; {:.1f}s (< 60s){}",
                      checks, 100.0 * worst_area_dev, bad, secs, first.empty() ? "" : "; first " + first)};
}

// 9. Label-defect robustness.

Outcome label_defects() {
  const Stopwatch clock;
  int wins = 0;
  std::string rows;
  for (int s = 1; s <= 5; ++s) {
    GenParams g;
    g.height = g.width = 96;
    g.seed = 900 + static_cast<std::uint64_t>(s);
    const SampleSet all = gen_sample_set(g, 24, "d");
    SampleSet train_set(all.begin(), all.begin() + 16), eval_set(all.begin() + 16, all.end());
    for (auto& r : train_set) r.mask = degrade_to_winrhizo(r.mask);

    ScoreHistogram h(4096);
    double inter = 0.0, uni = 0.0;
    for (const auto& r : eval_set) {
      const Image d = degrade_to_winrhizo(r.mask);
      std::vector<float> sc(d.data.begin(), d.data.end());
      h.accumulate(sc, r.mask.data);
      for (std::size_t i = 0; i < d.data.size(); ++i) {
        inter += d.data[i] && r.mask.data[i];
        uni += d.data[i] || r.mask.data[i];
      }
    }
    const double label_iou = inter / uni;
    const double label_auc = summarize_histogram(h, 0).roc_auc;
    const double baseline = std::max(label_iou, label_auc);

    TrainConfig c;
    c.arch.depth = 4;
    c.arch.base_width = 8;
    c.lr = 1e-3;
    c.momentum = 0.9;
    c.batch_size = 2;
    c.epochs = 40;
    c.eval_every = 40;
    c.pos_weight = compute_pos_weight(train_set).value;
    c.seed = static_cast<std::uint64_t>(s);
    const TrialReport r = train(c, train_set, eval_set);
    const double model = r.final_snapshot().roc_auc;
    wins += model > baseline;
    rows += fmt::format("{}seed {}: model {:.4f} vs labels IoU {:.4f} / ROC-AUC {:.4f}", rows.empty() ? "" : "; ", s,
                        model, label_iou, label_auc);
    note(rows.substr(rows.rfind("seed")));
  }
  const double secs = clock.seconds();
  return {wins >= 4 && secs < 1800.0,
          fmt::format("model beats its degraded labels on {} of 5 seeds (>= 4); {}; {:.0f}s (< 1800s)", wins, rows,
                      secs)};
}

// 10. Determinism of CLI runs.

std::map<std::string, std::string> run_files(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& run : fs::directory_iterator(out))
    for (const auto& e : fs::recursive_directory_iterator(run.path())) {
      if (!e.is_regular_file() || e.path().filename() == "resolved.ini") continue;
      std::ifstream f(e.path(), std::ios::binary);
      files[fs::relative(e.path(), run.path()).string()] = std::string(std::istreambuf_iterator<char>(f), {});
    }
  return files;
}

Outcome determinism() {
  const Stopwatch clock;
  const fs::path root = fs::temp_directory_path() / "rootnet_acceptance_10";
  fs::remove_all(root);
  fs::create_directories(root);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(root / name, std::ios::binary) << text;
    return (root / name).string();
  };
  const std::string synth = write("synth.ini", "[synth]\ncount = 8\nsize = 64\n");
  const std::string train = write("train.ini",
                                  "[run]\ntrials = 2\n[arch]\ndepth = 3\nbase_width = 4\n"
                                  "[train]\nlr = 0.005\nmomentum = 0.9\nepochs = 3\npos_weight = auto\n"
                                  "[data]\ntrain_fraction = 0.5\n[metrics]\nbins = 4096\n"
                                  "[synth]\ncount = 8\nsize = 64\n");
  auto cli = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.begin(), "rootnet");
    for (const char* a : {"--threads", "1", "--seed", "7", "--out"}) args.emplace_back(a);
    args.push_back(out.string());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    const int code = rootnet::cli::run_app(static_cast<int>(argv.size()), argv.data(), o, e);
    if (code != 0) note("command failed: " + e.str());
    return code;
  };

  int compared = 0, differing = 0, failures = 0;
  std::string first;
  auto twice = [&](const std::string& name, const std::vector<std::string>& args) {
    failures += cli(args, root / (name + "_a")) != 0;
    failures += cli(args, root / (name + "_b")) != 0;
    const auto a = run_files(root / (name + "_a"));
    const auto b = run_files(root / (name + "_b"));
    if (a.size() != b.size()) {
      ++differing;
      if (first.empty()) first = name + ": file sets differ";
    }
    for (const auto& [path, bytes] : a) {
      ++compared;
      auto it = b.find(path);
      if (it == b.end() || it->second != bytes) {
        ++differing;
        if (first.empty()) first = name + ": " + path;
      }
    }
  };
  twice("synth", {"synth", "--config", synth});
  twice("train", {"train", "--config", train});

  fs::path ckpt;
  for (const auto& run : fs::directory_iterator(root / "train_a")) ckpt = run.path() / "trial_0.ckpt";
  const std::string eval = write("eval.ini", "[eval]\ncheckpoint = " + ckpt.string() +
                                                 "\n[metrics]\nbins = 4096\n[synth]\ncount = 4\nsize = 64\n");
  twice("eval", {"eval", "--config", eval, "--svg"});

  int checkpoints = 0, csvs = 0;
  for (const auto& name : {"synth", "train", "eval"})
    for (const auto& [path, bytes] : run_files(root / (std::string(name) + "_a"))) {
      checkpoints += path.ends_with(".ckpt");
      csvs += path.ends_with(".csv");
    }
  fs::remove_all(root);
  return {failures == 0 && differing == 0 && compared > 0 && checkpoints == 2 && csvs >= 6,
          fmt::format("synth, train and eval each run twice with --threads 1: {} files compared "
                      "({} checkpoints, {} CSVs), {} differ, {} failed runs; {:.1f}s{}",
                      compared, checkpoints, csvs, differing, failures, clock.seconds(),
                      first.empty() ? "" : "; first " + first)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {gradients,      same_size,       memorization,
                                                          metrics_oracle, fpr_threshold,   transfer_ordering,
                                                          weight_surgery, slic_properties, label_defects,
                                                          determinism};
  if (argc != 2) {
    std::cerr << "usage: acceptance <1-10|all>\n";
    return 2;
  }
  std::vector<int> which;
  if (std::string(argv[1]) == "all") {
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  } else {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 10) {
      std::cerr << "usage: acceptance <1-10|all>\n";
      return 2;
    }
    which.push_back(n);
  }
  omp_set_num_threads(1);
  bool all = true;
  for (int n : which) {
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")\n" << std::flush;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
