#include "fflab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fflab {

namespace {

constexpr std::int64_t kMaxSites = (1ll << 31) - 2;

// Closed-interval row/column bounds with a small nudge so that box edges
// that coincide with a lattice row (the common case: integer box sizes)
// land inside, never outside.
int floor_div_eps(double x) { return static_cast<int>(std::floor(x + 1e-9)); }
int ceil_div_eps(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

}  // namespace

Domain Domain::hexagon(int N) {
  if (N < 0) throw std::invalid_argument("hexagon: N must be >= 0");
  const std::int64_t count = 1 + 3ll * N * (N + 1);
  if (count > kMaxSites) throw std::invalid_argument("hexagon: too many sites");
  Domain d;
  d.kind_ = DomainKind::Hexagon;
  d.pn_ = N;
  char buf[64];
  std::snprintf(buf, sizeof buf, "hexagon(%d)", N);
  d.name_ = buf;
  d.sites_.reserve(static_cast<std::size_t>(count));
  for (int v = -N; v <= N; ++v) {
    const int ulo = std::max(-N, -v - N);
    const int uhi = std::min(N, -v + N);
    for (int u = ulo; u <= uhi; ++u) d.sites_.push_back({u, v});
  }
  d.finalize();
  return d;
}

Domain Domain::half_plane_strip(int width, int height) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("half_plane_strip: width and height must be >= 1");
  if (static_cast<std::int64_t>(width + 2) * height > kMaxSites)
    throw std::invalid_argument("half_plane_strip: too many sites");
  Domain d;
  d.kind_ = DomainKind::HalfPlaneStrip;
  d.pw_ = width;
  d.ph_ = height;
  char buf[64];
  std::snprintf(buf, sizeof buf, "strip(%dx%d)", width, height);
  d.name_ = buf;
  for (int v = 0; v < height; ++v) {
    // |2u + v| <= width
    const int ulo = ceil_div_eps((-width - v) / 2.0);
    const int uhi = floor_div_eps((width - v) / 2.0);
    for (int u = ulo; u <= uhi; ++u) d.sites_.push_back({u, v});
  }
  d.finalize();
  return d;
}

Domain Domain::rectangle(double x1, double x2, double y1, double y2) {
  if (!(x2 > x1) || !(y2 > y1)) throw std::invalid_argument("rectangle: empty box");
  const double area = (x2 - x1 + 2) * ((y2 - y1) / kRowSpacing + 2);
  if (area > static_cast<double>(kMaxSites)) throw std::invalid_argument("rectangle: too many sites");
  Domain d;
  d.kind_ = DomainKind::Rectangle;
  d.bx1_ = x1; d.bx2_ = x2; d.by1_ = y1; d.by2_ = y2;
  char buf[96];
  std::snprintf(buf, sizeof buf, "rect[%g,%g]x[%g,%g]", x1, x2, y1, y2);
  d.name_ = buf;
  const int vlo = ceil_div_eps(y1 / kRowSpacing);
  const int vhi = floor_div_eps(y2 / kRowSpacing);
  for (int v = vlo; v <= vhi; ++v) {
    const int ulo = ceil_div_eps(x1 - 0.5 * v);
    const int uhi = floor_div_eps(x2 - 0.5 * v);
    for (int u = ulo; u <= uhi; ++u) d.sites_.push_back({u, v});
  }
  if (d.sites_.empty()) throw std::invalid_argument("rectangle: contains no lattice site");
  d.finalize();
  return d;
}

Domain Domain::rhombus(int n) {
  if (n < 1) throw std::invalid_argument("rhombus: n must be >= 1");
  if (static_cast<std::int64_t>(n) * n > kMaxSites)
    throw std::invalid_argument("rhombus: too many sites");
  Domain d;
  d.kind_ = DomainKind::Rhombus;
  d.pn_ = n;
  char buf[64];
  std::snprintf(buf, sizeof buf, "rhombus(%d)", n);
  d.name_ = buf;
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) d.sites_.push_back({u, v});
  d.finalize();
  return d;
}

void Domain::finalize() {
  std::int32_t umin = sites_[0].u, umax = sites_[0].u;
  std::int32_t vmax = sites_[0].v;
  vmin_ = sites_[0].v;
  for (const Site& s : sites_) {
    umin = std::min(umin, s.u);
    umax = std::max(umax, s.u);
    vmin_ = std::min(vmin_, s.v);
    vmax = std::max(vmax, s.v);
  }
  // one-site margin so outer-boundary sites share the lookup grid
  gu0_ = umin - 1; gu1_ = umax + 1;
  gv0_ = vmin_ - 1; gv1_ = vmax + 1;
  const std::int64_t uspan = static_cast<std::int64_t>(gu1_) - gu0_ + 1;
  const std::int64_t vspan = static_cast<std::int64_t>(gv1_) - gv0_ + 1;
  if (uspan * vspan > (1ll << 28)) throw std::invalid_argument("domain: bounding box too large");
  grid_.assign(static_cast<std::size_t>(uspan * vspan), -1);
  outer_grid_.assign(static_cast<std::size_t>(uspan * vspan), -1);

  auto cell = [&](Site s) {
    return static_cast<std::size_t>((s.v - gv0_) * uspan + (s.u - gu0_));
  };
  for (std::int32_t id = 0; id < size(); ++id) grid_[cell(sites_[static_cast<std::size_t>(id)])] = id;

  nbr_.resize(sites_.size());
  for (std::int32_t id = 0; id < size(); ++id) {
    const Site s = sites_[static_cast<std::size_t>(id)];
    bool boundary = false;
    for (int k = 0; k < 6; ++k) {
      const Site w = neighbor(s, k);
      const std::int32_t wid = grid_[cell(w)];
      nbr_[static_cast<std::size_t>(id)][static_cast<std::size_t>(k)] = wid;
      if (wid < 0) {
        boundary = true;
        if (outer_grid_[cell(w)] < 0) {
          outer_grid_[cell(w)] = 0;  // provisional, reindexed below
          outer_sites_.push_back(w);
        }
      }
    }
    if (boundary) inner_boundary_.push_back(id);
  }
  std::sort(outer_sites_.begin(), outer_sites_.end(), [](Site a, Site b) {
    return a.v != b.v ? a.v < b.v : a.u < b.u;
  });
  outer_adj_.resize(outer_sites_.size());
  for (std::int32_t j = 0; j < static_cast<std::int32_t>(outer_sites_.size()); ++j) {
    const Site w = outer_sites_[static_cast<std::size_t>(j)];
    outer_grid_[cell(w)] = j;
    auto& adj = outer_adj_[static_cast<std::size_t>(j)];
    for (int k = 0; k < 6; ++k) {
      const std::int32_t id = id_of(neighbor(w, k));
      if (id >= 0) adj.push_back(id);
    }
    std::sort(adj.begin(), adj.end());
  }
}

std::int32_t Domain::id_of(Site s) const {
  if (s.u < gu0_ || s.u > gu1_ || s.v < gv0_ || s.v > gv1_) return -1;
  const std::int64_t uspan = static_cast<std::int64_t>(gu1_) - gu0_ + 1;
  return grid_[static_cast<std::size_t>((s.v - gv0_) * uspan + (s.u - gu0_))];
}

std::int32_t Domain::outer_index_of(Site s) const {
  if (s.u < gu0_ || s.u > gu1_ || s.v < gv0_ || s.v > gv1_) return -1;
  const std::int64_t uspan = static_cast<std::int64_t>(gu1_) - gu0_ + 1;
  return outer_grid_[static_cast<std::size_t>((s.v - gv0_) * uspan + (s.u - gu0_))];
}

namespace {

// Radial part shared by all region kinds. Bounds are compared through the
// exact integer squared distance; ties can only arise when the squared
// radius is itself an integer, in which case the comparison is exact.
bool radial_in(std::int64_t d2, double r1, double r2, bool include_zero) {
  const double fd2 = static_cast<double>(d2);
  if (include_zero) return fd2 < r2 * r2;
  return r1 * r1 < fd2 && fd2 < r2 * r2;
}

// 4 cos^2(alpha) is an integer for the four standard openings
// (pi/2, pi/3, pi/4, pi/6); use exact arithmetic there.
bool cone_angle_ok(std::int64_t du, std::int64_t dv, double alpha) {
  if (dv < 0) return false;
  const double c = std::cos(alpha);
  const double c4 = 4.0 * c * c;
  const double lhs = 3.0 * static_cast<double>(dv * dv);
  const std::int64_t d2 = du * du + du * dv + dv * dv;
  const double c4r = std::nearbyint(c4);
  if (std::abs(c4 - c4r) < 1e-12) {
    return 3 * dv * dv >= static_cast<std::int64_t>(c4r) * d2;
  }
  return lhs >= c4 * static_cast<double>(d2);
}

}  // namespace

bool region_contains(const Region& r, Site s) {
  const std::int64_t d2 = dist2(s, r.center);
  switch (r.kind) {
    case RegionKind::Ball:
      return radial_in(d2, 0, r.r2, true);
    case RegionKind::Annulus:
      return radial_in(d2, r.r1, r.r2, false);
    case RegionKind::ConeSection: {
      const std::int64_t du = static_cast<std::int64_t>(s.u) - r.center.u;
      const std::int64_t dv = static_cast<std::int64_t>(s.v) - r.center.v;
      if (!cone_angle_ok(du, dv, r.alpha)) return false;
      return radial_in(d2, r.r1, r.r2, r.r1 == 0.0);
    }
  }
  return false;
}

std::vector<std::int32_t> region_sites(const Region& r, const Domain& d) {
  std::vector<std::int32_t> out;
  for (std::int32_t id = 0; id < d.size(); ++id)
    if (region_contains(r, d.site(id))) out.push_back(id);
  return out;
}

bool region_inside_domain(const Region& r, const Domain& d) {
  // scan the axial bounding box of the outer radius
  const int R = static_cast<int>(std::ceil(r.r2)) + 1;
  for (int dv = -R; dv <= R; ++dv) {
    for (int du = -R - std::abs(dv); du <= R + std::abs(dv); ++du) {
      const Site s{r.center.u + du, r.center.v + dv};
      if (region_contains(r, s) && !d.contains(s)) return false;
    }
  }
  return true;
}

}  // namespace fflab
