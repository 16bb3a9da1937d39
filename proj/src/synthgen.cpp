// Copyright 2026 The rootnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rootnet/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rootnet/hash.hpp"

namespace rootnet {

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Float RGB canvas.
struct Canvas {
  std::int64_t h, w;
  std::vector<double> rgb;
  Canvas(std::int64_t h_, std::int64_t w_) : h(h_), w(w_), rgb(static_cast<std::size_t>(h_ * w_ * 3)) {}
  double* px(std::int64_t y, std::int64_t x) { return &rgb[static_cast<std::size_t>((y * w + x) * 3)]; }
};

/// Multi-octave value noise in roughly [-1, 1].
std::vector<double> value_noise(std::int64_t h, std::int64_t w, double scale, int octaves, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(h * w), 0.0);
  double amp = 1.0, norm = 0.0;
  for (int o = 0; o < octaves; ++o, amp *= 0.5) {
    const double s = std::max(1.0, scale / std::pow(2.0, o));
    const auto gh = static_cast<std::int64_t>(static_cast<double>(h) / s) + 2;
    const auto gw = static_cast<std::int64_t>(static_cast<double>(w) / s) + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gh * gw));
    for (auto& v : lattice) v = uniform(rng, -1.0, 1.0);
    for (std::int64_t y = 0; y < h; ++y) {
      const double fy = static_cast<double>(y) / s;
      const auto iy = static_cast<std::int64_t>(fy);
      double ty = fy - static_cast<double>(iy);
      ty = ty * ty * (3.0 - 2.0 * ty);
      for (std::int64_t x = 0; x < w; ++x) {
        const double fx = static_cast<double>(x) / s;
        const auto ix = static_cast<std::int64_t>(fx);
        double tx = fx - static_cast<double>(ix);
        tx = tx * tx * (3.0 - 2.0 * tx);
        auto g = [&](std::int64_t yy, std::int64_t xx) { return lattice[static_cast<std::size_t>(yy * gw + xx)]; };
        const double top = g(iy, ix) * (1 - tx) + g(iy, ix + 1) * tx;
        const double bot = g(iy + 1, ix) * (1 - tx) + g(iy + 1, ix + 1) * tx;
        out[static_cast<std::size_t>(y * w + x)] += amp * (top * (1 - ty) + bot * ty);
      }
    }
    norm += amp;
  }
  for (auto& v : out) v /= norm;
  return out;
}

Canvas soil_background(std::int64_t h, std::int64_t w, const Rgb& color, double scale, double amplitude,
                       Rng& rng) {
  Canvas c(h, w);
  const auto coarse = value_noise(h, w, scale, 3, rng);
  const auto grain = value_noise(h, w, 2.0, 1, rng);
  for (std::int64_t i = 0; i < h * w; ++i) {
    const double n = amplitude * coarse[static_cast<std::size_t>(i)] +
                     0.35 * amplitude * grain[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k) c.rgb[static_cast<std::size_t>(i * 3 + k)] = color[k] + n * (1.0 - 0.15 * k);
  }
  return c;
}

void draw_bubble(Canvas& c, double cx, double cy, double a, double b, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double r = std::max(a, b) + 1.0;
  const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(cy - r));
  const auto y1 = std::min<std::int64_t>(c.h - 1, static_cast<std::int64_t>(cy + r));
  const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(cx - r));
  const auto x1 = std::min<std::int64_t>(c.w - 1, static_cast<std::int64_t>(cx + r));
  for (std::int64_t y = y0; y <= y1; ++y)
    for (std::int64_t x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx, dy = static_cast<double>(y) + 0.5 - cy;
      const double u = (dx * ca + dy * sa) / a, v = (-dx * sa + dy * ca) / b;
      const double rho = std::sqrt(u * u + v * v);
      if (rho > 1.0) continue;
      double* p = c.px(y, x);
      for (int k = 0; k < 3; ++k) p[k] = rho < 0.75 ? 0.35 * p[k] + 0.65 * 235.0 : 0.45 * p[k];
    }
}

struct RootPoint {
  double x, y, r;
};

bool inside(const GenParams& g, double x, double y, double margin) {
  return x > -margin && y > -margin && x < static_cast<double>(g.width) + margin &&
         y < static_cast<double>(g.height) + margin;
}

class RootPainter {
 public:
  RootPainter(const GenParams& g, Canvas& canvas, Image& mask)
      : g_(g), canvas_(canvas), mask_(mask), shade_(static_cast<std::size_t>(g.height * g.width), 2.0) {}

  std::int64_t root_pixels() const { return count_; }

  /// Paints the capsule between two points; returns newly covered pixels.
  std::int64_t segment(const RootPoint& a, const RootPoint& b) {
    const double r = std::max(a.r, b.r);
    const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(a.y, b.y) - r)));
    const auto y1 = std::min<std::int64_t>(g_.height - 1, static_cast<std::int64_t>(std::ceil(std::max(a.y, b.y) + r)));
    const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(std::min(a.x, b.x) - r)));
    const auto x1 = std::min<std::int64_t>(g_.width - 1, static_cast<std::int64_t>(std::ceil(std::max(a.x, b.x) + r)));
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    std::int64_t added = 0;
    for (std::int64_t y = y0; y <= y1; ++y)
      for (std::int64_t x = x0; x <= x1; ++x) {
        const double px = static_cast<double>(x) + 0.5, py = static_cast<double>(y) + 0.5;
        double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
        const double rr = a.r + t * (b.r - a.r);
        const double d = std::sqrt(dx * dx + dy * dy);
        if (d > rr) continue;
        const auto i = static_cast<std::size_t>(y * g_.width + x);
        const double s = d / rr;
        if (!mask_.data[i]) {
          mask_.data[i] = 1;
          ++added;
        }
        if (s < shade_[i]) {
          shade_[i] = s;
          double* p = canvas_.px(y, x);
          const double light = 1.0 - 0.28 * s * s;
          for (int k = 0; k < 3; ++k) p[k] = g_.root_color[k] * light;
        }
      }
    count_ += added;
    return added;
  }

  void occlude(const Canvas& soil, const RootPoint& at, double heading, double a, double b) {
    const double ca = std::cos(heading), sa = std::sin(heading);
    const double r = std::max(a, b) + 1.0;
    const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(at.y - r));
    const auto y1 = std::min<std::int64_t>(g_.height - 1, static_cast<std::int64_t>(at.y + r));
    const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(at.x - r));
    const auto x1 = std::min<std::int64_t>(g_.width - 1, static_cast<std::int64_t>(at.x + r));
    for (std::int64_t y = y0; y <= y1; ++y)
      for (std::int64_t x = x0; x <= x1; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - at.x, dy = static_cast<double>(y) + 0.5 - at.y;
        const double u = (dx * ca + dy * sa) / a, v = (-dx * sa + dy * ca) / b;
        if (u * u + v * v > 1.0) continue;
        const auto i = static_cast<std::size_t>(y * g_.width + x);
        if (mask_.data[i]) {
          mask_.data[i] = 0;
          --count_;
        }
        shade_[i] = 2.0;
        const double* s = &soil.rgb[i * 3];
        double* p = canvas_.px(y, x);
        for (int k = 0; k < 3; ++k) p[k] = 0.85 * s[k];
      }
  }

 private:
  const GenParams& g_;
  Canvas& canvas_;
  Image& mask_;
  std::vector<double> shade_;
  std::int64_t count_ = 0;
};

}  // namespace

void GenParams::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("generator: " + m); };
  if (height < 8 || width < 8) fail("image must be at least 8x8");
  if (min_roots < 1 || max_roots < min_roots) fail("root count range is empty");
  if (!(min_diameter >= 1.0) || max_diameter < min_diameter) fail("diameter range is invalid");
  if (!(diameter_variation >= 0.0 && diameter_variation < 1.0)) fail("diameter_variation must lie in [0, 1)");
  if (!(curvature >= 0.0)) fail("curvature must not be negative");
  if (!(occlusion_prob >= 0.0 && occlusion_prob <= 1.0)) fail("occlusion_prob must lie in [0, 1]");
  if (!(bubble_density >= 0.0)) fail("bubble_density must not be negative");
  if (!(target_density > 0.0 && target_density < 0.5)) fail("target_density must lie in (0, 0.5)");
  if (!(texture_scale >= 1.0)) fail("texture_scale must be at least 1");
  if (!(pixel_noise >= 0.0) || !(texture_amplitude >= 0.0)) fail("noise amplitudes must not be negative");
}

GeneratedImage gen_root_image(const GenParams& g) {
  g.validate();
  Rng rng(mix_seed(g.seed, fnv1a("root-image")));
  const Canvas soil = soil_background(g.height, g.width, g.soil_color, g.texture_scale, g.texture_amplitude, rng);
  Canvas canvas = soil;

  const double area = static_cast<double>(g.height * g.width);
  const auto bubbles =
      std::poisson_distribution<int>(g.bubble_density * area / 1e4)(rng);
  for (int i = 0; i < bubbles; ++i) {
    const double cx = uniform(rng, 0.0, static_cast<double>(g.width));
    const double cy = uniform(rng, 0.0, static_cast<double>(g.height));
    const double a = uniform(rng, 2.5, 7.0), b = uniform(rng, 2.5, 7.0);
    draw_bubble(canvas, cx, cy, a, b, uniform(rng, 0.0, kPi));
  }

  GeneratedImage out;
  out.mask = Image(g.height, g.width, 1);
  RootPainter painter(g, canvas, out.mask);
  const auto target = static_cast<std::int64_t>(std::llround(g.target_density * area));
  const int planned = std::uniform_int_distribution<int>(g.min_roots, g.max_roots)(rng);
  const std::int64_t max_steps = 4 * (g.height + g.width);
  std::normal_distribution<double> turn(0.0, 1.0);

  for (int root = 0; root < g.max_roots && painter.root_pixels() < target; ++root) {
    const int remaining_roots = std::max(1, planned - root);
    const std::int64_t budget = (target - painter.root_pixels()) / remaining_roots + 1;
    const double base_d = uniform(rng, g.min_diameter, g.max_diameter);
    const double phase = uniform(rng, 0.0, 2.0 * kPi);
    const double freq = uniform(rng, 0.02, 0.08);
    double heading = uniform(rng, 0.0, 2.0 * kPi);
    double x = std::floor(uniform(rng, 0.0, static_cast<double>(g.width))) + 0.5;
    double y = std::floor(uniform(rng, 0.0, static_cast<double>(g.height))) + 0.5;
    auto radius = [&](std::int64_t k) {
      return 0.5 * base_d * (1.0 + g.diameter_variation * std::sin(phase + freq * static_cast<double>(k)));
    };
    std::vector<RootPoint> path{{x, y, radius(0)}};
    std::vector<double> headings{heading};
    std::int64_t painted = painter.segment(path[0], path[0]);
    // Grow forward from the seed point, then backward if the budget remains.
    for (int dir = 0; dir < 2 && painted < budget && painter.root_pixels() < target; ++dir) {
      double hx = x, hy = y, hd = dir == 0 ? heading : heading + kPi;
      RootPoint prev = path.front();
      std::vector<RootPoint> grown;
      std::vector<double> grown_headings;
      for (std::int64_t k = 1; k < max_steps && painted < budget; ++k) {
        hd += g.curvature * turn(rng);
        hx += std::cos(hd);
        hy += std::sin(hd);
        if (!inside(g, hx, hy, 0.0)) break;
        const RootPoint next{hx, hy, radius(dir == 0 ? k : -k)};
        painted += painter.segment(prev, next);
        prev = next;
        grown.push_back(next);
        grown_headings.push_back(hd);
        if (painter.root_pixels() >= target) break;
      }
      if (dir == 0) {
        path.insert(path.end(), grown.begin(), grown.end());
        headings.insert(headings.end(), grown_headings.begin(), grown_headings.end());
      } else {
        path.insert(path.begin(), grown.rbegin(), grown.rend());
        headings.insert(headings.begin(), grown_headings.rbegin(), grown_headings.rend());
      }
    }
    if (path.size() > 8 && uniform(rng, 0.0, 1.0) < g.occlusion_prob) {
      const auto at = static_cast<std::size_t>(
          uniform(rng, 0.2, 0.8) * static_cast<double>(path.size() - 1));
      const double r = path[at].r;
      painter.occlude(soil, path[at], headings[at], r * uniform(rng, 1.5, 3.0), r * 1.6 + 1.0);
    }
  }

  out.image = Image(g.height, g.width, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < canvas.rgb.size(); ++i) {
    const double v = canvas.rgb[i] + g.pixel_noise * noise(rng);
    out.image.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

Image skeletonize(const Image& mask) {
  const std::int64_t h = mask.height, w = mask.width;
  Image s(h, w, 1);
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = mask.data[i] ? 1 : 0;
  auto at = [&](std::int64_t y, std::int64_t x) -> int {
    if (y < 0 || x < 0 || y >= h || x >= w) return 0;
    return s.data[static_cast<std::size_t>(y * w + x)];
  };
  std::vector<std::size_t> kill;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
          if (!at(y, x)) continue;
          // P2..P9 clockwise from north.
          const int p[8] = {at(y - 1, x), at(y - 1, x + 1), at(y, x + 1), at(y + 1, x + 1),
                            at(y + 1, x), at(y + 1, x - 1), at(y, x - 1), at(y - 1, x - 1)};
          int b = 0, a = 0;
          for (int k = 0; k < 8; ++k) {
            b += p[k];
            a += (p[k] == 0 && p[(k + 1) % 8] == 1) ? 1 : 0;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0 && (p[0] * p[2] * p[4] != 0 || p[2] * p[4] * p[6] != 0)) continue;
          if (pass == 1 && (p[0] * p[2] * p[6] != 0 || p[0] * p[4] * p[6] != 0)) continue;
          kill.push_back(static_cast<std::size_t>(y * w + x));
        }
      for (auto i : kill) s.data[i] = 0;
      changed = changed || !kill.empty();
    }
  }
  return s;
}

namespace {

struct Pt {
  double x, y;
};

void douglas_peucker(const std::vector<Pt>& pts, std::size_t a, std::size_t b, double tol,
                     std::vector<std::size_t>& keep) {
  if (b <= a + 1) return;
  const double vx = pts[b].x - pts[a].x, vy = pts[b].y - pts[a].y;
  const double len = std::hypot(vx, vy);
  double best = -1.0;
  std::size_t arg = a;
  for (std::size_t i = a + 1; i < b; ++i) {
    const double dx = pts[i].x - pts[a].x, dy = pts[i].y - pts[a].y;
    const double d = len > 0 ? std::abs(dx * vy - dy * vx) / len : std::hypot(dx, dy);
    if (d > best) {
      best = d;
      arg = i;
    }
  }
  if (best > tol) {
    douglas_peucker(pts, a, arg, tol, keep);
    keep.push_back(arg);
    douglas_peucker(pts, arg, b, tol, keep);
  }
}

void fill_rect(Image& out, const Rect& r) {
  const double ex = std::abs(r.ux) * r.half_length + std::abs(r.uy) * r.half_width;
  const double ey = std::abs(r.uy) * r.half_length + std::abs(r.ux) * r.half_width;
  const auto y0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(r.cy - ey)));
  const auto y1 = std::min<std::int64_t>(out.height - 1, static_cast<std::int64_t>(std::ceil(r.cy + ey)));
  const auto x0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(r.cx - ex)));
  const auto x1 = std::min<std::int64_t>(out.width - 1, static_cast<std::int64_t>(std::ceil(r.cx + ex)));
  for (std::int64_t y = y0; y <= y1; ++y)
    for (std::int64_t x = x0; x <= x1; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - r.cx, dy = static_cast<double>(y) + 0.5 - r.cy;
      if (std::abs(dx * r.ux + dy * r.uy) <= r.half_length &&
          std::abs(-dx * r.uy + dy * r.ux) <= r.half_width)
        out.at(y, x) = 1;
    }
}

}  // namespace

Degraded degrade_with_rects(const Image& mask, const DegradeOptions& options) {
  if (mask.channels != 1) throw UsageError("degrade_to_winrhizo: mask must have one channel");
  Degraded out;
  out.mask = Image(mask.height, mask.width, 1);
  const std::int64_t h = mask.height, w = mask.width;
  if (std::none_of(mask.data.begin(), mask.data.end(), [](std::uint8_t v) { return v != 0; })) {
    out.mask = mask;
    return out;
  }
  const Image skel = skeletonize(mask);
  auto on = [&](std::int64_t y, std::int64_t x) {
    return y >= 0 && x >= 0 && y < h && x < w && skel.data[static_cast<std::size_t>(y * w + x)];
  };
  auto degree = [&](std::int64_t y, std::int64_t x) {
    int d = 0;
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx)
        if ((dy || dx) && on(y + dy, x + dx)) ++d;
    return d;
  };

  // Trace skeleton pixels into walks, endpoints first, 4-neighbours preferred.
  std::vector<char> seen(skel.data.size(), 0);
  std::vector<std::vector<Pt>> walks;
  static constexpr int kOrder[8][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}, {1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
  auto trace = [&](std::int64_t y, std::int64_t x) {
    std::vector<Pt> walk;
    for (bool more = true; more;) {
      seen[static_cast<std::size_t>(y * w + x)] = 1;
      walk.push_back({static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5});
      more = false;
      for (const auto& d : kOrder) {
        const std::int64_t yy = y + d[0], xx = x + d[1];
        if (on(yy, xx) && !seen[static_cast<std::size_t>(yy * w + xx)]) {
          y = yy;
          x = xx;
          more = true;
          break;
        }
      }
    }
    walks.push_back(std::move(walk));
  };
  for (int pass = 0; pass < 2; ++pass)
    for (std::int64_t y = 0; y < h; ++y)
      for (std::int64_t x = 0; x < w; ++x)
        if (on(y, x) && !seen[static_cast<std::size_t>(y * w + x)] && (pass == 1 || degree(y, x) <= 1))
          trace(y, x);

  auto polyline_length = [](const std::vector<Pt>& p) {
    double l = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) l += std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);
    return l;
  };

  // Constant width per walk from the mean distance of its skeleton pixels to
  // the nearest soil pixel.
  auto soil_distance = [&](const Pt& p) {
    const auto cy = static_cast<std::int64_t>(p.y), cx = static_cast<std::int64_t>(p.x);
    constexpr std::int64_t kReach = 16;
    std::int64_t best = kReach * kReach;
    for (std::int64_t dy = -kReach; dy <= kReach; ++dy)
      for (std::int64_t dx = -kReach; dx <= kReach; ++dx) {
        const std::int64_t yy = cy + dy, xx = cx + dx;
        const bool soil = yy < 0 || xx < 0 || yy >= h || xx >= w ||
                          !mask.data[static_cast<std::size_t>(yy * w + xx)];
        if (soil) best = std::min(best, dy * dy + dx * dx);
      }
    return std::sqrt(static_cast<double>(best));
  };
  constexpr std::size_t kMinWalk = 3;
  std::vector<double> width(walks.size(), 1.0);
  for (std::size_t k = 0; k < walks.size(); ++k) {
    if (walks[k].size() < kMinWalk) continue;
    double sum = 0.0;
    for (const Pt& p : walks[k]) sum += soil_distance(p);
    width[k] = std::max(1.0, 2.0 * sum / static_cast<double>(walks[k].size()) - 1.0);
  }

  for (std::size_t k = 0; k < walks.size(); ++k) {
    const auto& pts = walks[k];
    const double wd = width[k];
    if (pts.size() < kMinWalk || polyline_length(pts) < 0.5 * wd) continue;
    std::vector<std::size_t> keep{0};
    douglas_peucker(pts, 0, pts.size() - 1, std::min(options.tolerance, 0.5 * wd), keep);
    keep.push_back(pts.size() - 1);
    for (std::size_t s = 0; s + 1 < keep.size(); ++s) {
      const Pt a = pts[keep[s]], b = pts[keep[s + 1]];
      const double L = std::hypot(b.x - a.x, b.y - a.y);
      if (L <= 0.0) continue;
      const double ux = (b.x - a.x) / L, uy = (b.y - a.y) / L;
      const double s0 = s > 0 ? options.gap : -0.5 * wd;
      const double s1 = s + 2 < keep.size() ? L - options.gap : L + 0.5 * wd;
      if (s1 <= s0) continue;
      const double mid = 0.5 * (s0 + s1);
      Rect r{a.x + ux * mid, a.y + uy * mid, ux, uy, 0.5 * (s1 - s0), 0.5 * wd};
      fill_rect(out.mask, r);
      out.rects.push_back(r);
    }
  }
  return out;
}

Image degrade_to_winrhizo(const Image& mask, const DegradeOptions& options) {
  return degrade_with_rects(mask, options).mask;
}

double iou(const Image& a, const Image& b) {
  if (a.data.size() != b.data.size()) throw ShapeError("iou: masks differ in size");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool x = a.data[i] != 0, y = b.data[i] != 0;
    inter += (x && y) ? 1 : 0;
    uni += (x || y) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

Image to_image(Canvas& c, double noise_sigma, Rng& rng) {
  Image img(c.h, c.w, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < c.rgb.size(); ++i) {
    const double v = c.rgb[i] + noise_sigma * noise(rng);
    img.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return img;
}

Image texture_patch(int family, std::int64_t n, Rng& rng) {
  switch (family) {
    case 0: {  // dark soil
      Canvas c = soil_background(n, n, {68.0, 52.0, 38.0}, 10.0, 18.0, rng);
      return to_image(c, 5.0, rng);
    }
    case 1: {  // bright bubble field
      Canvas c = soil_background(n, n, {196.0, 192.0, 184.0}, 16.0, 12.0, rng);
      const int k = std::uniform_int_distribution<int>(4, 9)(rng);
      for (int i = 0; i < k; ++i)
        draw_bubble(c, uniform(rng, 0.0, static_cast<double>(n)), uniform(rng, 0.0, static_cast<double>(n)),
                    uniform(rng, 3.0, 8.0), uniform(rng, 3.0, 8.0), uniform(rng, 0.0, kPi));
      return to_image(c, 5.0, rng);
    }
    case 2: {  // root tubes
      GenParams g;
      g.height = g.width = n;
      g.min_roots = 2;
      g.max_roots = 3;
      g.min_diameter = 5.0;
      g.max_diameter = 9.0;
      g.target_density = 0.2;
      g.bubble_density = 0.0;
      g.occlusion_prob = 0.0;
      g.seed = rng();
      return gen_root_image(g).image;
    }
    default: {  // stripes
      Canvas c = soil_background(n, n, {128.0, 110.0, 92.0}, 12.0, 10.0, rng);
      const double period = uniform(rng, 4.0, 6.0), angle = uniform(rng, 0.0, kPi);
      const double ca = std::cos(angle), sa = std::sin(angle), phase = uniform(rng, 0.0, 2.0 * kPi);
      for (std::int64_t y = 0; y < n; ++y)
        for (std::int64_t x = 0; x < n; ++x) {
          const double s = 45.0 * std::sin(2.0 * kPi * (static_cast<double>(x) * ca + static_cast<double>(y) * sa) / period + phase);
          double* p = c.px(y, x);
          for (int k = 0; k < 3; ++k) p[k] += s;
        }
      return to_image(c, 5.0, rng);
    }
  }
}

}  // namespace

std::vector<LabeledPatch> gen_classification_set(const ClassParams& params) {
  if (params.classes < 2 || params.classes > 4) throw ConfigError("classes must lie in [2, 4]");
  if (params.per_class < 1) throw ConfigError("per_class must be at least 1");
  if (params.patch < 8) throw ConfigError("patch must be at least 8 pixels");
  std::vector<LabeledPatch> out;
  out.reserve(static_cast<std::size_t>(params.classes * params.per_class));
  for (int i = 0; i < params.per_class; ++i)
    for (int c = 0; c < params.classes; ++c) {
      Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(i * params.classes + c)));
      out.push_back({texture_patch(c, params.patch, rng), c});
    }
  return out;
}

namespace {

// Low-contrast roots among dense bubbles: both families share this regime.
void faint_roots(GenParams& g) {
  g.root_color = {g.soil_color[0] + 35.0, g.soil_color[1] + 31.5, g.soil_color[2] + 28.0};
  g.texture_amplitude = 45.0;
  g.pixel_noise = 18.0;
  g.bubble_density = 6.0;
}

}  // namespace

GenParams source_family(std::uint64_t seed, std::int64_t size) {
  GenParams g;
  g.height = g.width = size;
  g.seed = seed;
  faint_roots(g);
  return g;
}

GenParams target_family(std::uint64_t seed, std::int64_t size) {
  GenParams g;
  g.height = g.width = size;
  g.seed = seed;
  for (int k = 0; k < 3; ++k) g.soil_color[k] += kDomainColorOffset[k];
  g.texture_scale = 6.0;
  faint_roots(g);
  return g;
}

SampleSet gen_sample_set(const GenParams& base, int count, const std::string& prefix) {
  SampleSet set;
  set.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    GenParams g = base;
    g.seed = mix_seed(base.seed, static_cast<std::uint64_t>(i));
    GeneratedImage gi = gen_root_image(g);
    SampleRecord r;
    r.id = fmt::format("{}{:04d}", prefix, i);
    r.image = std::move(gi.image);
    r.mask = std::move(gi.mask);
    r.date = "synthetic";
    r.tube = fmt::format("t{}", i % 4);
    r.depth = "d0";
    set.push_back(std::move(r));
  }
  return set;
}

DomainPair gen_domain_pair(std::uint64_t seed_a, std::uint64_t seed_b, const DomainPairOptions& options) {
  if (options.target_train < 1 || options.target_train >= options.target_count) {
    throw ConfigError("target_train must lie in [1, target_count)");
  }
  DomainPair p;
  p.source = gen_sample_set(source_family(seed_a, options.size), options.source_count, "src");
  p.target = gen_sample_set(target_family(seed_b, options.size), options.target_count, "tgt");
  p.target_train.assign(p.target.begin(), p.target.begin() + options.target_train);
  p.target_eval.assign(p.target.begin() + options.target_train, p.target.end());
  return p;
}

}  // namespace rootnet
