#include "fflab/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace fflab {

namespace {

const DynState& state_at(const RunRecord& run, double t) {
  constexpr double kTol = 1e-9;
  if (std::abs(run.final_state.t - t) <= kTol) return run.final_state;
  for (const DynState& s : run.snapshots)
    if (std::abs(s.t - t) <= kTol) return s;
  throw std::invalid_argument("render: no state retained at the requested time");
}

// Burnt connected components; comp ids are assigned in site order so the
// labeling (and any tie between equal cluster sizes) is deterministic.
std::vector<std::int64_t> burnt_components(const Domain& d, const DynState& st,
                                           std::vector<std::int32_t>& comp) {
  comp.assign(st.state.size(), -1);
  std::vector<std::int64_t> sizes;
  std::vector<std::int32_t> stack;
  for (std::int32_t id = 0; id < d.size(); ++id) {
    if (st.state[static_cast<std::size_t>(id)] != SiteState::Burnt) continue;
    if (comp[static_cast<std::size_t>(id)] >= 0) continue;
    const std::int32_t c = static_cast<std::int32_t>(sizes.size());
    sizes.push_back(0);
    comp[static_cast<std::size_t>(id)] = c;
    stack.assign(1, id);
    while (!stack.empty()) {
      const std::int32_t s = stack.back();
      stack.pop_back();
      ++sizes[static_cast<std::size_t>(c)];
      for (std::int32_t nb : d.neighbor_ids(s))
        if (nb >= 0 && st.state[static_cast<std::size_t>(nb)] == SiteState::Burnt &&
            comp[static_cast<std::size_t>(nb)] < 0) {
          comp[static_cast<std::size_t>(nb)] = c;
          stack.push_back(nb);
        }
    }
  }
  return sizes;
}

RenderStats stats_of(const std::vector<std::int64_t>& sizes, const DynState& st) {
  RenderStats r;
  for (std::int64_t s : sizes) {
    r.burnt_total += s;
    if (s >= r.largest_burnt) {
      r.second_burnt = r.largest_burnt;
      r.largest_burnt = s;
    } else if (s > r.second_burnt) {
      r.second_burnt = s;
    }
  }
  for (std::uint8_t t : st.triggered) r.triggered += t;
  return r;
}

int largest_comp_index(const std::vector<std::int64_t>& sizes) {
  int best = -1;
  std::int64_t mx = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] > mx) {
      mx = sizes[c];
      best = static_cast<int>(c);
    }
  return best;
}

void put_hex(std::string& out, double cx, double cy, const char* fill) {
  // Voronoi cell of the triangular lattice: circumradius 1/sqrt(3), vertices
  // at 30 + 60k degrees. SVG y runs downward, so y is negated.
  static const double vx[6] = {0.5000000, 0.0000000, -0.5000000,
                               -0.5000000, 0.0000000, 0.5000000};
  static const double vy[6] = {0.2886751, 0.5773503, 0.2886751,
                               -0.2886751, -0.5773503, -0.2886751};
  char buf[320];
  int len = std::snprintf(buf, sizeof buf, "<polygon points=\"");
  for (int k = 0; k < 6; ++k)
    len += std::snprintf(buf + len, sizeof buf - static_cast<std::size_t>(len),
                         "%.3f,%.3f ", cx + vx[k], -(cy + vy[k]));
  len += std::snprintf(buf + len, sizeof buf - static_cast<std::size_t>(len),
                       "\" fill=\"%s\" stroke=\"#555555\" stroke-width=\"0.04\"/>\n", fill);
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

RenderStats snapshot_stats(const RunRecord& run, double t) {
  if (run.domain == nullptr) throw std::invalid_argument("render: run lacks a domain");
  const DynState& st = state_at(run, t);
  std::vector<std::int32_t> comp;
  return stats_of(burnt_components(*run.domain, st, comp), st);
}

RenderStats render_snapshot(const RunRecord& run, double t, const std::string& path) {
  if (run.domain == nullptr) throw std::invalid_argument("render: run lacks a domain");
  const Domain& d = *run.domain;
  const DynState& st = state_at(run, t);
  std::vector<std::int32_t> comp;
  const std::vector<std::int64_t> sizes = burnt_components(d, st, comp);
  const int red = largest_comp_index(sizes);

  double x1 = 1e300, x2 = -1e300, y1 = 1e300, y2 = -1e300;
  for (const Site& s : d.outer_boundary()) {
    const Vec2 e = embed(s);
    x1 = std::min(x1, e.x);
    x2 = std::max(x2, e.x);
    y1 = std::min(y1, e.y);
    y2 = std::max(y2, e.y);
  }
  const double pad = 1.2;

  std::string out;
  out.reserve(static_cast<std::size_t>(d.size()) * 160 + 4096);
  {
    char head[360];
    std::snprintf(head, sizeof head,
                  "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                  "viewBox=\"%.3f %.3f %.3f %.3f\">\n"
                  "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" "
                  "fill=\"#ffffff\"/>\n",
                  x1 - pad, -(y2 + pad), x2 - x1 + 2 * pad, y2 - y1 + 2 * pad, x1 - pad,
                  -(y2 + pad), x2 - x1 + 2 * pad, y2 - y1 + 2 * pad);
    out += head;
  }

  for (std::int32_t id = 0; id < d.size(); ++id) {
    const Vec2 e = embed(d.site(id));
    const char* fill = "#ffffff";
    switch (st.state[static_cast<std::size_t>(id)]) {
      case SiteState::Vacant:
        fill = "#ffffff";
        break;
      case SiteState::Occupied:
        fill = "#9e9e9e";
        break;
      case SiteState::Burnt:
        fill = comp[static_cast<std::size_t>(id)] == red ? "#d62728" : "#1f77b4";
        break;
    }
    put_hex(out, e.x, e.y, fill);
  }
  const auto& outer = d.outer_boundary();
  for (std::size_t j = 0; j < outer.size(); ++j) {
    const Vec2 e = embed(outer[j]);
    put_hex(out, e.x, e.y, st.triggered[j] ? "#2ca02c" : "#f2f2f2");
  }
  out += "</svg>\n";

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("render: cannot open output file: " + path);
  const std::size_t n = std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
  if (n != out.size()) throw std::runtime_error("render: short write: " + path);
  return stats_of(sizes, st);
}

}  // namespace fflab
