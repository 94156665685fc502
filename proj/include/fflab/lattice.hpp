#pragma once

// Triangular lattice geometry: axial coordinates, finite domains, regions.
//
// Sites are addressed by axial coordinates (u,v) and embedded in the plane
// as u*(1,0) + v*(1/2, sqrt(3)/2), so every site has six neighbours at
// Euclidean distance 1. Squared Euclidean distances between sites are the
// integers du^2 + du*dv + dv^2, which we use everywhere a radius comparison
// could otherwise suffer a floating-point tie.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fflab {

inline constexpr double kSqrt3 = 1.7320508075688772;
inline constexpr double kRowSpacing = kSqrt3 / 2.0;  // vertical gap between rows

struct Site {
  std::int32_t u = 0;
  std::int32_t v = 0;

  friend bool operator==(const Site& a, const Site& b) { return a.u == b.u && a.v == b.v; }
  friend bool operator!=(const Site& a, const Site& b) { return !(a == b); }
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 embed(Site s) { return {s.u + 0.5 * s.v, s.v * kRowSpacing}; }

// Exact squared Euclidean distance between sites.
inline std::int64_t dist2(Site a, Site b) {
  const std::int64_t du = static_cast<std::int64_t>(a.u) - b.u;
  const std::int64_t dv = static_cast<std::int64_t>(a.v) - b.v;
  return du * du + du * dv + dv * dv;
}

// Graph distance (all six lattice directions are unit steps).
inline std::int64_t graph_dist(Site a, Site b) {
  const std::int64_t du = static_cast<std::int64_t>(a.u) - b.u;
  const std::int64_t dv = static_cast<std::int64_t>(a.v) - b.v;
  const std::int64_t s = du + dv;
  return (std::abs(du) + std::abs(dv) + std::abs(s)) / 2;
}

// Fixed neighbour order; several tie-breaking rules depend on it.
inline constexpr std::array<Site, 6> kNeighborSteps = {{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1},
}};

inline Site neighbor(Site s, int k) {
  return {s.u + kNeighborSteps[static_cast<std::size_t>(k)].u,
          s.v + kNeighborSteps[static_cast<std::size_t>(k)].v};
}

enum class DomainKind : std::uint8_t { Hexagon, HalfPlaneStrip, Rectangle, Rhombus };

// A finite set of lattice sites with dense ids (row-major in the embedding:
// rows bottom to top, left to right within a row), precomputed neighbour ids
// and the inner/outer boundary. Immutable after construction; safe to share
// across threads.
class Domain {
 public:
  // Sites at graph distance <= N from the origin. 1 + 3N(N+1) sites.
  static Domain hexagon(int N);
  // Rows v = 0..height-1, restricted to |x| <= width/2 (x the embedded
  // abscissa, i.e. |2u+v| <= width). The bottom row sits on y = 0.
  static Domain half_plane_strip(int width, int height);
  // Closed box [x1,x2] x [y1,y2] in the embedding.
  static Domain rectangle(double x1, double x2, double y1, double y2);
  // Axial box 0 <= u,v < n. Side-to-side crossings on this domain use the
  // two axial directions.
  static Domain rhombus(int n);

  DomainKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  std::int32_t size() const { return static_cast<std::int32_t>(sites_.size()); }
  Site site(std::int32_t id) const { return sites_[static_cast<std::size_t>(id)]; }
  const std::vector<Site>& sites() const { return sites_; }

  // -1 when the site is not in the domain.
  std::int32_t id_of(Site s) const;
  bool contains(Site s) const { return id_of(s) >= 0; }

  // Neighbour ids in kNeighborSteps order; -1 marks neighbours outside.
  const std::array<std::int32_t, 6>& neighbor_ids(std::int32_t id) const {
    return nbr_[static_cast<std::size_t>(id)];
  }

  // Sites of the domain with at least one neighbour outside it.
  const std::vector<std::int32_t>& inner_boundary() const { return inner_boundary_; }

  // Sites outside the domain adjacent to it, row-major order.
  const std::vector<Site>& outer_boundary() const { return outer_sites_; }
  // Domain ids adjacent to outer-boundary vertex j (ascending).
  const std::vector<std::int32_t>& outer_neighbors(std::int32_t j) const {
    return outer_adj_[static_cast<std::size_t>(j)];
  }
  std::int32_t outer_index_of(Site s) const;

  // Lowest embedded row present in the domain (v coordinate).
  std::int32_t bottom_row() const { return vmin_; }

  // Parameters as given at construction (meaning depends on kind).
  int param_n() const { return pn_; }
  int param_width() const { return pw_; }
  int param_height() const { return ph_; }
  double box_x1() const { return bx1_; }
  double box_x2() const { return bx2_; }
  double box_y1() const { return by1_; }
  double box_y2() const { return by2_; }

 private:
  Domain() = default;
  void finalize();  // ids, lookup grid, adjacency, boundaries

  DomainKind kind_ = DomainKind::Hexagon;
  std::string name_;
  int pn_ = 0, pw_ = 0, ph_ = 0;
  double bx1_ = 0, bx2_ = 0, by1_ = 0, by2_ = 0;  // Rectangle box

  std::vector<Site> sites_;
  std::int32_t vmin_ = 0;  // lowest row with sites
  // lookup box, one site wider than the domain so outer vertices fit
  std::int32_t gu0_ = 0, gu1_ = -1, gv0_ = 0, gv1_ = -1;
  std::vector<std::int32_t> grid_;  // (u,v) -> id, -1 when absent
  std::vector<std::array<std::int32_t, 6>> nbr_;
  std::vector<std::int32_t> inner_boundary_;
  std::vector<Site> outer_sites_;
  std::vector<std::vector<std::int32_t>> outer_adj_;
  std::vector<std::int32_t> outer_grid_;  // same grid box, outer index or -1
};

// Regions select subsets of sites by closed-form inequalities.
//
//   Ball(c,r):        dist(s,c) < r
//   Annulus(c,r1,r2): r1 < dist(s,c) < r2
//   ConeSection(apex,alpha,r1,r2): the cone of half-opening alpha around the
//     upward vertical with apex at `apex` (closed: boundary rays included,
//     only rows v >= apex.v), intersected with {dist < r2} when r1 = 0
//     (apex included) or with the open annulus {r1 < dist < r2} otherwise.
enum class RegionKind : std::uint8_t { Ball, Annulus, ConeSection };

struct Region {
  RegionKind kind = RegionKind::Ball;
  Site center;        // ball/annulus centre or cone apex
  double alpha = 0;   // cone half-opening, radians in (0, pi/2]
  double r1 = 0;
  double r2 = 0;

  static Region ball(Site c, double r) { return {RegionKind::Ball, c, 0, 0, r}; }
  static Region annulus(Site c, double r1, double r2) {
    return {RegionKind::Annulus, c, 0, r1, r2};
  }
  static Region cone(Site apex, double alpha, double r1, double r2) {
    return {RegionKind::ConeSection, apex, alpha, r1, r2};
  }
};

bool region_contains(const Region& r, Site s);

// All domain sites inside the region, ascending id order.
std::vector<std::int32_t> region_sites(const Region& r, const Domain& d);

// True when every lattice site of the region lies in the domain. Event
// specifications use this to reject regions that stick out.
bool region_inside_domain(const Region& r, const Domain& d);

}  // namespace fflab
