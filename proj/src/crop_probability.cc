// Copyright 2026 The clmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Crop-pair success probability
//
//   p = 1/(s_max - s_min) * integral over s of p1(s) * p2(s) ds
//
// p2(s): a crop of scale s lies inside the reference rect.
// p1(s): a crop of scale s contains the trigger rect and does not touch the
//        reference rect.
//
// For square crops of side a both factors are ratios of rectangle areas in
// the space of admissible top-left corners, so they are closed-form and
// piecewise rational in a. The breakpoints are the values of a at which any
// interval endpoint changes branch; between breakpoints the integrand is
// smooth and Gauss-Legendre quadrature in a is exact to rounding.

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "clmark/common.h"
#include "clmark/triggers.h"

namespace clmark {

namespace {

struct Interval {
  double lo;
  double hi;
};

// Probability that a uniform position on [0, range] falls in `iv`.
double AxisMeasure(Interval iv, double range) {
  if (range <= 0.0) return (iv.lo <= 0.0 && 0.0 <= iv.hi) ? 1.0 : 0.0;
  const double lo = std::max(iv.lo, 0.0);
  const double hi = std::min(iv.hi, range);
  return hi > lo ? (hi - lo) / range : 0.0;
}

Interval Intersect(Interval a, Interval b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

struct AxisGeometry {
  double canvas;
  double ref_lo, ref_hi;
  bool has_trigger;
  double trig_lo, trig_hi;
};

struct Factors {
  double p1;
  double p2;
};

// Both factors for a crop with extents (aw, ah).
Factors CropFactors(const AxisGeometry& gx, const AxisGeometry& gy, bool has_ref,
                    double aw, double ah) {
  const double rx = gx.canvas - aw, ry = gy.canvas - ah;

  double p2 = 0.0;
  if (has_ref) {
    p2 = AxisMeasure({gx.ref_lo, gx.ref_hi - aw}, rx) *
         AxisMeasure({gy.ref_lo, gy.ref_hi - ah}, ry);
  }

  const Interval cx = gx.has_trigger ? Interval{gx.trig_hi - aw, gx.trig_lo}
                                     : Interval{0.0, rx};
  const Interval cy = gy.has_trigger ? Interval{gy.trig_hi - ah, gy.trig_lo}
                                     : Interval{0.0, ry};
  double p1 = AxisMeasure(cx, rx) * AxisMeasure(cy, ry);
  if (has_ref) {
    const Interval ox{gx.ref_lo - aw, gx.ref_hi};
    const Interval oy{gy.ref_lo - ah, gy.ref_hi};
    p1 -= AxisMeasure(Intersect(cx, ox), rx) * AxisMeasure(Intersect(cy, oy), ry);
  }
  return {std::max(0.0, p1), p2};
}

AxisGeometry MakeAxis(double canvas, int ref_pos, int ref_len, bool has_trigger,
                      int trig_pos, int trig_len) {
  return {canvas, static_cast<double>(ref_pos),
          static_cast<double>(ref_pos + ref_len), has_trigger,
          static_cast<double>(trig_pos), static_cast<double>(trig_pos + trig_len)};
}

// Values of a at which a constant endpoint meets an (offset - a) endpoint.
void AddBreakpoints(const AxisGeometry& g, std::vector<double>& out) {
  const double constants[] = {0.0, g.ref_lo, g.ref_hi, g.trig_lo};
  const double offsets[] = {g.canvas, g.ref_lo, g.ref_hi, g.trig_hi};
  for (double c : constants)
    for (double o : offsets) out.push_back(o - c);
}

double AnalyticProbability(const LayoutSpec& layout, const CropModel& crop) {
  const double m = std::min(layout.canvas_w, layout.canvas_h);
  const bool has_ref = !layout.ref_rect.empty();
  const bool has_trigger = !layout.trigger_rect.empty();
  const Rect& ref = layout.ref_rect;
  const Rect& trig = layout.trigger_rect;
  const AxisGeometry gx = MakeAxis(layout.canvas_w, ref.x, ref.w, has_trigger,
                                   trig.x, trig.w);
  const AxisGeometry gy = MakeAxis(layout.canvas_h, ref.y, ref.h, has_trigger,
                                   trig.y, trig.h);

  auto integrand = [&](double a) {
    const Factors f = CropFactors(gx, gy, has_ref, a, a);
    return f.p1 * f.p2;
  };

  const double a_lo = std::sqrt(crop.scale_min) * m;
  const double a_hi = std::sqrt(crop.scale_max) * m;
  if (crop.scale_max == crop.scale_min) return integrand(a_lo);

  std::vector<double> cuts = {a_lo, a_hi};
  std::vector<double> candidates;
  AddBreakpoints(gx, candidates);
  AddBreakpoints(gy, candidates);
  for (double c : candidates)
    if (c > a_lo && c < a_hi) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  // ds = 2a / m^2 da
  auto weighted = [&](double a) { return integrand(a) * 2.0 * a / (m * m); };
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss<double, 30>::integrate(
        weighted, cuts[i], cuts[i + 1]);
  }
  return std::clamp(total / (crop.scale_max - crop.scale_min), 0.0, 1.0);
}

CropPairEstimate MonteCarloProbability(const LayoutSpec& layout,
                                       const CropModel& crop,
                                       const MonteCarloMode& mode) {
  Require(mode.n_samples > 0, "Monte Carlo needs at least one sample");
  const double cw = layout.canvas_w, ch = layout.canvas_h;
  const double m = std::min(cw, ch);
  const Rect& ref = layout.ref_rect;
  const Rect& trig = layout.trigger_rect;
  const bool has_ref = !ref.empty();
  const bool has_trigger = !trig.empty();
  const double log_amin = std::log(crop.aspect_min);
  const double log_amax = std::log(crop.aspect_max);

  Rng rng(mode.seed);
  uint64_t hits = 0;
  for (uint64_t i = 0; i < mode.n_samples; ++i) {
    const double s = UniformRange(rng, crop.scale_min, crop.scale_max);
    const double aspect = std::exp(UniformRange(rng, log_amin, log_amax));
    const double w = std::min(cw, std::sqrt(s * aspect) * m);
    const double h = std::min(ch, std::sqrt(s / aspect) * m);
    const double x1 = UniformRange(rng, 0.0, cw - w);
    const double y1 = UniformRange(rng, 0.0, ch - h);
    const double x2 = UniformRange(rng, 0.0, cw - w);
    const double y2 = UniformRange(rng, 0.0, ch - h);
    if (!has_ref) continue;

    const bool second_in_ref = x2 >= ref.x && x2 + w <= ref.x + ref.w &&
                               y2 >= ref.y && y2 + h <= ref.y + ref.h;
    if (!second_in_ref) continue;
    const bool first_has_trigger =
        !has_trigger || (x1 <= trig.x && x1 + w >= trig.x + trig.w &&
                         y1 <= trig.y && y1 + h >= trig.y + trig.h);
    if (!first_has_trigger) continue;
    const bool first_touches_ref = x1 < ref.x + ref.w && x1 + w > ref.x &&
                                   y1 < ref.y + ref.h && y1 + h > ref.y;
    const bool crops_overlap =
        x1 < x2 + w && x2 < x1 + w && y1 < y2 + h && y2 < y1 + h;
    if (!first_touches_ref && !crops_overlap) ++hits;
  }
  const double n = static_cast<double>(mode.n_samples);
  const double p = hits / n;
  return {p, std::sqrt(p * (1.0 - p) / n), mode.n_samples};
}

}  // namespace

void CropModel::Validate() const {
  Require(scale_min > 0.0 && scale_min <= scale_max && scale_max <= 1.0,
          "crop scale range must satisfy 0 < min <= max <= 1");
  Require(aspect_min > 0.0 && aspect_min <= aspect_max,
          "crop aspect range must be positive and ordered");
}

CropPairEstimate CropPairSuccessProbability(const LayoutSpec& layout,
                                            const CropModel& crop,
                                            const CropProbabilityMode& mode) {
  layout.Validate();
  crop.Validate();
  if (std::holds_alternative<AnalyticMode>(mode)) {
    if (crop.aspect_min != 1.0 || crop.aspect_max != 1.0) {
      Fail(ErrorKind::kUnsupportedMode,
           "analytic crop-pair probability supports square crops only; use "
           "Monte Carlo");
    }
    return {AnalyticProbability(layout, crop), 0.0, 0};
  }
  return MonteCarloProbability(layout, crop, std::get<MonteCarloMode>(mode));
}

}  // namespace clmark
