#include "vdamf/filter_bank.hpp"

#include <algorithm>
#include <cmath>

namespace vdamf {

void MatchState::validate() const {
  if (!std::isfinite(tx) || !std::isfinite(ty) || !std::isfinite(theta) || !std::isfinite(w) ||
      !std::isfinite(l)) {
    throw InvalidInput("match state must be finite");
  }
  if (!(w > 0.0) || !(l > 0.0)) throw InvalidInput("match state requires w > 0 and l > 0");
}

FilterWeights FilterWeights::scaled(double k) const {
  FilterWeights out = *this;
  out.surround_weight *= k;
  out.interior_weight *= k;
  out.side_edge_weight *= k;
  out.end_edge_weight *= k;
  return out;
}

std::vector<Rect> FilterSpec::rects() const {
  std::vector<Rect> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back(r.rect);
  return out;
}

const FilterRegion* FilterSpec::find(RegionKind kind) const {
  for (const auto& r : regions) {
    if (r.kind == kind) return &r;
  }
  return nullptr;
}

double FilterSpec::value_at(double x, double y) const {
  double s = 0.0;
  for (const auto& r : regions) {
    const Rect& q = r.rect;
    if (x >= q.xmin && x < q.xmax && y >= q.ymin && y < q.ymax) s += q.height;
  }
  return s;
}

namespace {

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

FilterRegion make_region(RegionKind kind, const std::array<AffineBound, 4>& b, double w, double l,
                         double height, double dh, double d2h) {
  FilterRegion r;
  r.kind = kind;
  r.bounds = b;
  r.rect = {b[0].at(w, l), b[1].at(w, l), b[2].at(w, l), b[3].at(w, l), height};
  r.dheight_dbeta = dh;
  r.d2height_dbeta2 = d2h;
  return r;
}

}  // namespace

FilterSpec build_filter(const MatchState& state, double phi, const FilterWeights& fw) {
  state.validate();
  const double w = state.w;
  const double l = state.l;

  FilterSpec spec;
  spec.phi = phi;
  spec.beta = wrap_angle(state.theta - phi);
  const double sb = std::sin(spec.beta);
  const double cb = std::cos(spec.beta);

  const double hl = fw.surround_length_margin * 0.5;
  const double hw = fw.surround_width_margin * 0.5;
  spec.regions.push_back(make_region(
      RegionKind::kSurround,
      {AffineBound{-hl, 0.0, -0.5}, {hl, 0.0, 0.5}, {-hw, -0.5, 0.0}, {hw, 0.5, 0.0}}, w, l,
      fw.surround_weight, 0.0, 0.0));
  spec.regions.push_back(make_region(
      RegionKind::kInterior,
      {AffineBound{0.0, 0.0, -0.5}, {0.0, 0.0, 0.5}, {0.0, -0.5, 0.0}, {0.0, 0.5, 0.0}}, w, l,
      fw.interior_weight, 0.0, 0.0));

  // The sensor lies along (cos(beta), -sin(beta)) in the filter frame, so the
  // visible end is at x-sign of cos(beta) and the visible side at y-sign of -sin(beta).
  const double end_sign = sign_of(cb);
  const double side_sign = -sign_of(sb);
  const bool side_present = std::abs(sb) >= fw.edge_epsilon;
  const bool end_present = std::abs(cb) >= fw.edge_epsilon;
  const bool side_dominant = std::abs(sb) >= std::abs(cb) - 1e-12;

  const bool side_fits = w > fw.side_edge_depth;
  const bool end_fits = l > fw.end_edge_depth;

  // Bounds of the sensor-facing band of given depth along one axis. The band
  // collapses to the full interior when the interior is thinner than the depth.
  auto band = [](double sgn, double depth, bool fits, bool width_axis) {
    AffineBound lo, hi;
    if (!fits) {
      lo = width_axis ? AffineBound{0.0, -0.5, 0.0} : AffineBound{0.0, 0.0, -0.5};
      hi = width_axis ? AffineBound{0.0, 0.5, 0.0} : AffineBound{0.0, 0.0, 0.5};
    } else if (sgn > 0.0) {
      lo = width_axis ? AffineBound{-depth, 0.5, 0.0} : AffineBound{-depth, 0.0, 0.5};
      hi = width_axis ? AffineBound{0.0, 0.5, 0.0} : AffineBound{0.0, 0.0, 0.5};
    } else {
      lo = width_axis ? AffineBound{0.0, -0.5, 0.0} : AffineBound{0.0, 0.0, -0.5};
      hi = width_axis ? AffineBound{depth, -0.5, 0.0} : AffineBound{depth, 0.0, -0.5};
    }
    return std::pair{lo, hi};
  };
  // Span along an axis, optionally excluding the other edge's band at one end.
  auto span_excluding = [](double sgn, double depth, bool exclude, bool width_axis) {
    AffineBound lo = width_axis ? AffineBound{0.0, -0.5, 0.0} : AffineBound{0.0, 0.0, -0.5};
    AffineBound hi = width_axis ? AffineBound{0.0, 0.5, 0.0} : AffineBound{0.0, 0.0, 0.5};
    if (exclude) {
      if (sgn > 0.0) {
        hi.c0 -= depth;
      } else {
        lo.c0 += depth;
      }
    }
    return std::pair{lo, hi};
  };

  if (side_present) {
    const double depth = std::min(fw.side_edge_depth, w);
    auto [ylo, yhi] = band(side_sign, depth, side_fits, true);
    auto [xlo, xhi] = span_excluding(end_sign, std::min(fw.end_edge_depth, l),
                                     end_present && !side_dominant, false);
    const double as = std::abs(sb);
    FilterRegion r = make_region(RegionKind::kSideEdge, {xlo, xhi, ylo, yhi}, w, l,
                                 fw.side_edge_weight * as,
                                 fw.side_edge_weight * sign_of(sb) * cb,
                                 -fw.side_edge_weight * as);
    if (r.rect.xmax > r.rect.xmin && r.rect.ymax > r.rect.ymin) spec.regions.push_back(r);
  }
  if (end_present) {
    const double depth = std::min(fw.end_edge_depth, l);
    auto [xlo, xhi] = band(end_sign, depth, end_fits, false);
    auto [ylo, yhi] = span_excluding(side_sign, std::min(fw.side_edge_depth, w),
                                     side_present && side_dominant, true);
    const double ac = std::abs(cb);
    FilterRegion r = make_region(RegionKind::kEndEdge, {xlo, xhi, ylo, yhi}, w, l,
                                 fw.end_edge_weight * ac,
                                 -fw.end_edge_weight * sign_of(cb) * sb,
                                 -fw.end_edge_weight * ac);
    if (r.rect.xmax > r.rect.xmin && r.rect.ymax > r.rect.ymin) spec.regions.push_back(r);
  }

  spec.alpha = normalize_filter(spec.rects());
  return spec;
}

double normalize_filter(std::span<const Rect> rects) {
  if (rects.empty()) throw InvalidInput("normalize_filter: no rectangles");
  std::vector<double> xs, ys;
  xs.reserve(2 * rects.size());
  ys.reserve(2 * rects.size());
  for (const auto& r : rects) {
    if (!(r.xmin < r.xmax) || !(r.ymin < r.ymax)) {
      throw InvalidInput("normalize_filter: degenerate rectangle");
    }
    xs.push_back(r.xmin);
    xs.push_back(r.xmax);
    ys.push_back(r.ymin);
    ys.push_back(r.ymax);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double energy = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double cx = 0.5 * (xs[i] + xs[i + 1]);
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      double s = 0.0;
      for (const auto& r : rects) {
        if (cx > r.xmin && cx < r.xmax && cy > r.ymin && cy < r.ymax) s += r.height;
      }
      energy += s * s * (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  if (!(energy > 0.0)) throw InvalidInput("normalize_filter: filter has zero energy");
  return 1.0 / std::sqrt(energy);
}

double filter_energy_pairwise(std::span<const Rect> rects) {
  double energy = 0.0;
  for (const auto& a : rects) {
    for (const auto& b : rects) {
      const double ox = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
      const double oy = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
      if (ox > 0.0 && oy > 0.0) energy += a.height * b.height * ox * oy;
    }
  }
  return energy;
}

namespace {

// Overlap length of two intervals and its gradient in (w, l), embedded in Vec5.
struct Overlap {
  double value = 0.0;
  Vec5 grad = Vec5::Zero();
};

Overlap overlap(const FilterRegion& a, const FilterRegion& b, int lo_idx, int hi_idx) {
  const auto rect_lo = [&](const FilterRegion& r) { return lo_idx == 0 ? r.rect.xmin : r.rect.ymin; };
  const auto rect_hi = [&](const FilterRegion& r) { return lo_idx == 0 ? r.rect.xmax : r.rect.ymax; };
  const AffineBound& hi = rect_hi(a) <= rect_hi(b) ? a.bounds[hi_idx] : b.bounds[hi_idx];
  const AffineBound& lo = rect_lo(a) >= rect_lo(b) ? a.bounds[lo_idx] : b.bounds[lo_idx];
  Overlap o;
  o.value = std::min(rect_hi(a), rect_hi(b)) - std::max(rect_lo(a), rect_lo(b));
  o.grad[kWidth] = hi.cw - lo.cw;
  o.grad[kLength] = hi.cl - lo.cl;
  return o;
}

}  // namespace

NormalizationSensitivity normalization_sensitivity(const FilterSpec& spec) {
  double e = 0.0;
  Vec5 ge = Vec5::Zero();
  Mat5 he = Mat5::Zero();
  for (const auto& a : spec.regions) {
    for (const auto& b : spec.regions) {
      const Overlap ox = overlap(a, b, 0, 1);
      const Overlap oy = overlap(a, b, 2, 3);
      if (!(ox.value > 0.0) || !(oy.value > 0.0)) continue;

      const double hh = a.rect.height * b.rect.height;
      Vec5 ghh = Vec5::Zero();
      ghh[kTheta] = a.dheight_dbeta * b.rect.height + a.rect.height * b.dheight_dbeta;
      const double hhh = a.d2height_dbeta2 * b.rect.height + 2.0 * a.dheight_dbeta * b.dheight_dbeta +
                         a.rect.height * b.d2height_dbeta2;

      const double area = ox.value * oy.value;
      const Vec5 garea = ox.grad * oy.value + oy.grad * ox.value;
      const Mat5 harea = ox.grad * oy.grad.transpose() + oy.grad * ox.grad.transpose();

      e += hh * area;
      ge += ghh * area + hh * garea;
      Mat5 h = hh * harea + ghh * garea.transpose() + garea * ghh.transpose();
      h(kTheta, kTheta) += hhh * area;
      he += h;
    }
  }
  if (!(e > 0.0)) throw InvalidInput("normalization_sensitivity: zero filter energy");

  NormalizationSensitivity out;
  out.energy = e;
  out.alpha = 1.0 / std::sqrt(e);
  const double e32 = std::pow(e, -1.5);
  const double e52 = std::pow(e, -2.5);
  out.alpha_grad = -0.5 * e32 * ge;
  out.alpha_hess = 0.75 * e52 * (ge * ge.transpose()) - 0.5 * e32 * he;
  return out;
}

}  // namespace vdamf
