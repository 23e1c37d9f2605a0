#include "vdamf/match_engine.hpp"

#include <array>
#include <cmath>

namespace vdamf {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Un-normalized response of one point and its derivatives in (tx, ty, theta, w, l).
struct PointTerm {
  double value = 0.0;
  Vec5 grad = Vec5::Zero();
  Mat5 hess = Mat5::Zero();
};

// Box integral along one axis: Phi((u - a)/s) - Phi((u - b)/s), with the
// first and second partials in (u, a, b).
struct BoxTerm {
  double v, du, da, db, duu, dua, dub, daa, dbb;
};


// Distinct rectangle bounds along each filter axis. Regions share many
// bounds, so each point evaluates the normal cdf and pdf once per distinct
// value and the regions index into those.
struct AxisEnds {
  std::array<double, 8> value{};
  int count = 0;

  int add(double v) {
    for (int k = 0; k < count; ++k) {
      if (value[k] == v) return k;
    }
    if (count == static_cast<int>(value.size())) throw InvalidInput("filter has too many regions");
    value[count] = v;
    return count++;
  }
};

struct RegionIndex {
  int xa, xb, ya, yb;
  Vec2 gxa, gxb, gya, gyb;  // bound gradients in (w, l)
};

struct Layout {
  AxisEnds xs, ys;
  std::vector<RegionIndex> regions;
};

Layout make_layout(const FilterSpec& filter) {
  Layout lay;
  for (const auto& region : filter.regions) {
    const Rect& r = region.rect;
    const auto& b = region.bounds;
    lay.regions.push_back({lay.xs.add(r.xmin), lay.xs.add(r.xmax), lay.ys.add(r.ymin),
                           lay.ys.add(r.ymax), Vec2(b[0].cw, b[0].cl), Vec2(b[1].cw, b[1].cl),
                           Vec2(b[2].cw, b[2].cl), Vec2(b[3].cw, b[3].cl)});
  }
  return lay;
}

// Normal cdf and pdf of (u - e) / sigma for each distinct bound e.
struct EndValues {
  std::array<double, 8> z, cdf, pdf;
};

inline void end_values(double u, const AxisEnds& ends, double is, EndValues& out) {
  for (int k = 0; k < ends.count; ++k) {
    const double z = (u - ends.value[k]) * is;
    out.z[k] = z;
    out.cdf[k] = normal_cdf(z);
    out.pdf[k] = normal_pdf(z);
  }
}

inline BoxTerm box_term(const EndValues& e, int a, int b, double is) {
  const double za = e.z[a];
  const double zb = e.z[b];
  const double pa = e.pdf[a];
  const double pb = e.pdf[b];
  const double is2 = is * is;
  BoxTerm t;
  t.v = e.cdf[a] - e.cdf[b];
  t.du = (pa - pb) * is;
  t.da = -pa * is;
  t.db = pb * is;
  t.duu = (-za * pa + zb * pb) * is2;
  t.dua = za * pa * is2;
  t.dub = -zb * pb * is2;
  t.daa = -za * pa * is2;
  t.dbb = zb * pb * is2;
  return t;
}

// Gradient and Hessian of a box integral. The coordinate u depends on the
// pose only and the bounds a, b on the size only, so the blocks are built
// separately.
inline void box_derivatives(const BoxTerm& t, const Vec3& gu, const Mat3& hu, const Vec2& ga,
                            const Vec2& gb, Vec5& g, Mat5& h) {
  g.head<3>() = t.du * gu;
  g.tail<2>() = t.da * ga + t.db * gb;
  const Vec2 mixed = t.dua * ga + t.dub * gb;
  h.topLeftCorner<3, 3>() = t.duu * (gu * gu.transpose()) + t.du * hu;
  h.topRightCorner<3, 2>() = gu * mixed.transpose();
  h.bottomLeftCorner<2, 3>() = mixed * gu.transpose();
  h.bottomRightCorner<2, 2>() = t.daa * (ga * ga.transpose()) + t.dbb * (gb * gb.transpose());
}

PointTerm point_term(const Vec2& m, const MatchState& st, double c, double s,
                     const FilterSpec& filter, const Layout& lay, double sigma) {
  const double dx = m.x() - st.tx;
  const double dy = m.y() - st.ty;
  const double ux = c * dx + s * dy;
  const double uy = -s * dx + c * dy;

  // Pose derivatives of the filter-frame coordinates.
  const Vec3 gux(-c, -s, uy);
  const Vec3 guy(s, -c, -ux);
  Mat3 hux;
  hux << 0.0, 0.0, s, 0.0, 0.0, -c, s, -c, -ux;
  Mat3 huy;
  huy << 0.0, 0.0, c, 0.0, 0.0, s, c, s, -uy;

  const double is = 1.0 / sigma;
  EndValues ex, ey;
  end_values(ux, lay.xs, is, ex);
  end_values(uy, lay.ys, is, ey);

  PointTerm out;
  Vec5 gx, gy;
  Mat5 hx, hy;
  for (std::size_t k = 0; k < filter.regions.size(); ++k) {
    const FilterRegion& region = filter.regions[k];
    const RegionIndex& ri = lay.regions[k];
    const BoxTerm bx = box_term(ex, ri.xa, ri.xb, is);
    const BoxTerm by = box_term(ey, ri.ya, ri.yb, is);
    box_derivatives(bx, gux, hux, ri.gxa, ri.gxb, gx, hx);
    box_derivatives(by, guy, huy, ri.gya, ri.gyb, gy, hy);

    const double p = bx.v * by.v;
    const Vec5 gp = by.v * gx + bx.v * gy;
    const Mat5 cross = gx * gy.transpose();
    const Mat5 hp = by.v * hx + bx.v * hy + cross + cross.transpose();

    const double h = region.rect.height;
    out.value += h * p;
    out.grad += h * gp;
    out.hess += h * hp;
    if (region.dheight_dbeta != 0.0 || region.d2height_dbeta2 != 0.0) {
      out.grad[kTheta] += region.dheight_dbeta * p;
      out.hess.row(kTheta) += region.dheight_dbeta * gp.transpose();
      out.hess.col(kTheta) += region.dheight_dbeta * gp;
      out.hess(kTheta, kTheta) += region.d2height_dbeta2 * p;
    }
  }
  return out;
}

double point_value(const Vec2& m, const MatchState& st, double c, double s,
                   const FilterSpec& filter, const Layout& lay, double sigma) {
  const double dx = m.x() - st.tx;
  const double dy = m.y() - st.ty;
  const double ux = c * dx + s * dy;
  const double uy = -s * dx + c * dy;
  const double is = 1.0 / sigma;
  std::array<double, 8> cx, cy;
  for (int k = 0; k < lay.xs.count; ++k) cx[k] = normal_cdf((ux - lay.xs.value[k]) * is);
  for (int k = 0; k < lay.ys.count; ++k) cy[k] = normal_cdf((uy - lay.ys.value[k]) * is);
  double v = 0.0;
  for (std::size_t k = 0; k < filter.regions.size(); ++k) {
    const RegionIndex& ri = lay.regions[k];
    v += filter.regions[k].rect.height * (cx[ri.xa] - cx[ri.xb]) * (cy[ri.ya] - cy[ri.yb]);
  }
  return v;
}

MatchEval assemble(const Cluster& cluster, const MatchState& state, double phi,
                   const FilterWeights& weights, bool parallel) {
  if (cluster.empty()) throw InvalidInput("evaluate: empty cluster");
  state.validate();

  MatchEval ev;
  ev.filter = build_filter(state, phi, weights);
  const auto& means = cluster.planar_means();
  const double sigma = cluster.sigma();
  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const auto n = static_cast<std::ptrdiff_t>(means.size());
  const Layout lay = make_layout(ev.filter);

  std::vector<PointTerm> terms(means.size());
  if (parallel) {
#pragma omp parallel for schedule(static) if (means.size() >= kParallelPointThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      terms[static_cast<std::size_t>(i)] =
          point_term(means[static_cast<std::size_t>(i)], state, c, s, ev.filter, lay, sigma);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      terms[static_cast<std::size_t>(i)] =
          point_term(means[static_cast<std::size_t>(i)], state, c, s, ev.filter, lay, sigma);
    }
  }

  const double alpha = ev.filter.alpha;
  Vec5 g = Vec5::Zero();
  Mat5 h = Mat5::Zero();
  double raw = 0.0;
  ev.point_partials.resize(means.size());
  ev.total_point_partials.resize(means.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    raw += terms[i].value;
    g += terms[i].grad;
    h += terms[i].hess;
    // The response depends on p_i only through p_i - (tx, ty).
    ev.point_partials[i].col(0) = -alpha * terms[i].hess.block<3, 1>(0, kTx);
    ev.point_partials[i].col(1) = -alpha * terms[i].hess.block<3, 1>(0, kTy);
  }
  const NormalizationSensitivity ns = normalization_sensitivity(ev.filter);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Mat52& tp = ev.total_point_partials[i];
    tp.col(0) = -alpha * terms[i].hess.col(kTx) - terms[i].grad[kTx] * ns.alpha_grad;
    tp.col(1) = -alpha * terms[i].hess.col(kTy) - terms[i].grad[kTy] * ns.alpha_grad;
  }
  h = 0.5 * (h + h.transpose());

  ev.alpha = alpha;
  ev.raw = raw;
  ev.value = alpha * raw;
  ev.grad = alpha * g;
  ev.hess = alpha * h;

  ev.total_grad = ev.grad + raw * ns.alpha_grad;
  ev.total_hess = ev.hess + ns.alpha_grad * g.transpose() + g * ns.alpha_grad.transpose() +
                  raw * ns.alpha_hess;
  ev.total_hess = 0.5 * (ev.total_hess + ev.total_hess.transpose());
  return ev;
}

}  // namespace

double step_integral(double x_a, double x_m, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("step_integral: sigma must be positive");
  return 0.5 * std::erfc(-(x_m - x_a) / (std::sqrt(2.0) * sigma));
}

double rect_integral(const Rect& rect, const Vec2& m, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("rect_integral: sigma must be positive");
  const double fx = step_integral(rect.xmin, m.x(), sigma) - step_integral(rect.xmax, m.x(), sigma);
  const double fy = step_integral(rect.ymin, m.y(), sigma) - step_integral(rect.ymax, m.y(), sigma);
  return rect.height * fx * fy;
}

LocalPoints to_filter_frame(std::span<const Vec2> means, const Vec2& m0, double t_theta) {
  LocalPoints out;
  out.origin = m0;
  out.angle = t_theta;
  const Mat2 r = rotation(-t_theta);
  out.coords.reserve(means.size());
  for (const auto& m : means) out.coords.push_back(r * (m - m0));
  return out;
}

MatchEval evaluate(const Cluster& cluster, const MatchState& state, double phi,
                   const FilterWeights& weights) {
  return assemble(cluster, state, phi, weights, true);
}

MatchEval evaluate_serial(const Cluster& cluster, const MatchState& state, double phi,
                          const FilterWeights& weights) {
  return assemble(cluster, state, phi, weights, false);
}

double evaluate_value_with_alpha(std::span<const Vec2> means, double sigma,
                                 const MatchState& state, const FilterSpec& filter, double alpha) {
  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const Layout lay = make_layout(filter);
  double raw = 0.0;
  for (const auto& m : means) raw += point_value(m, state, c, s, filter, lay, sigma);
  return alpha * raw;
}

double evaluate_value(const Cluster& cluster, const MatchState& state, double phi,
                      const FilterWeights& weights) {
  if (cluster.empty()) throw InvalidInput("evaluate: empty cluster");
  state.validate();
  const FilterSpec filter = build_filter(state, phi, weights);
  return evaluate_value_with_alpha(cluster.planar_means(), cluster.sigma(), state, filter,
                                   filter.alpha);
}

}  // namespace vdamf
