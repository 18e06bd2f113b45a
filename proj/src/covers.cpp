#include "barylab/covers.hpp"

#include "barylab/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace barylab {

std::vector<std::size_t> BallCover::uncovered() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < window.size(); ++i) {
    bool inside = false;
    for (const auto& b : elements) {
      if (space.distance(window[i], b.center) < b.radius) {
        inside = true;
        break;
      }
    }
    if (!inside) out.push_back(i);
  }
  return out;
}

GroupTable::GroupTable(const ModelSpace& space, const GroupAction& action) : tol_(space.tol()) {
  if (action.word_length < 0) throw Error(ErrorCode::invalid_input, "word length must be nonnegative");
  std::vector<Isometry> letters;
  for (const auto& g : action.generators) {
    letters.push_back(g);
    letters.push_back(g.inverse());
  }
  elements_.push_back(Isometry::identity(space));
  lengths_.push_back(0);
  std::vector<int> frontier{0};
  for (int len = 1; len <= action.word_length && !letters.empty(); ++len) {
    std::vector<int> next;
    for (int e : frontier) {
      for (const auto& s : letters) {
        Isometry cand = s.compose(elements_[static_cast<std::size_t>(e)]);
        if (find(cand) >= 0) continue;
        elements_.push_back(std::move(cand));
        lengths_.push_back(len);
        next.push_back(size() - 1);
      }
    }
    frontier = std::move(next);
  }
  max_length_ = letters.empty() ? 0 : action.word_length;

  const int n = size();
  table_.assign(static_cast<std::size_t>(n * n), -1);
  inverses_.assign(static_cast<std::size_t>(n), -1);
  for (int a = 0; a < n; ++a) {
    inverses_[static_cast<std::size_t>(a)] = find(element(a).inverse());
    for (int b = 0; b < n; ++b) table_[static_cast<std::size_t>(a * n + b)] = find(element(a).compose(element(b)));
  }
}

GroupTable GroupTable::trivial(const ModelSpace& space) { return GroupTable(space, GroupAction{}); }

int GroupTable::find(const Isometry& g) const {
  // Distinct elements of a discrete group differ at order one; this only absorbs rounding.
  for (int i = 0; i < size(); ++i)
    if (elements_[static_cast<std::size_t>(i)].difference(g) < std::max(1e-6, 1e3 * tol_)) return i;
  return -1;
}

const AdjElement& AdjacencySet::by_id(int id) const {
  auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorCode::unknown_simplex, "vertex " + std::to_string(id) + " is not in Adj(U)");
  return elements[it->second];
}

int AdjacencySet::translate(int h, int id) const {
  const int g = group.compose(h, group_of(id));
  return g < 0 ? -1 : encode(base_of(id), g);
}

IntersectionTest balls_intersect(const ModelSpace& space, const std::vector<Ball>& balls) {
  IntersectionTest out;
  if (balls.empty()) throw Error(ErrorCode::invalid_input, "intersection of no balls");
  const double tol = space.tol();
  if (balls.size() == 1) {
    out.value = -balls[0].radius;
    out.witness = balls[0].center;
    out.nonempty = balls[0].radius > 0;
    return out;
  }
  if (balls.size() == 2) {
    const double d = space.distance(balls[0].center, balls[1].center);
    out.value = 0.5 * (d - balls[0].radius - balls[1].radius);
    if (d > 0) {
      const double t = std::clamp(0.5 * (d + balls[0].radius - balls[1].radius), 0.0, d);
      out.witness = space.geodesic_point(balls[0].center, balls[1].center, t);
    } else {
      out.witness = balls[0].center;
    }
    // Two open balls in a uniquely geodesic space meet iff d < r1 + r2.
    if (space.is_cat0()) {
      out.nonempty = out.value < 0;
      return out;
    }
  } else {
    std::vector<MinimaxTerm> terms;
    for (const auto& b : balls) terms.push_back({b.center, 1.0, -b.radius});
    // Start from the best of the centres and the pairwise equal-excess points.
    std::vector<SpacePoint> starts;
    for (const auto& b : balls) starts.push_back(b.center);
    for (std::size_t i = 0; i < balls.size(); ++i) {
      for (std::size_t j = i + 1; j < balls.size(); ++j) {
        const double d = space.distance(balls[i].center, balls[j].center);
        if (d <= 0) continue;
        const double t = std::clamp(0.5 * (d + balls[i].radius - balls[j].radius), 0.0, d);
        starts.push_back(space.geodesic_point(balls[i].center, balls[j].center, t));
      }
    }
    SpacePoint best = starts[0];
    double best_value = minimax_value(space, terms, best);
    for (const auto& s : starts) {
      const double v = minimax_value(space, terms, s);
      if (v < best_value) {
        best_value = v;
        best = s;
      }
    }
    MinimaxResult res = minimax_descent(space, terms, best, 1000, -10 * tol);
    if (res.value >= -10 * tol) {
      double spread = 0.0;
      for (const auto& b : balls) spread = std::max(spread, b.radius);
      std::mt19937_64 rng(0x6e657276ULL);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int restart = 0; restart < 20 && res.value >= -10 * tol; ++restart) {
        const auto basis = space.tangent_basis(best);
        Vec v = Vec::Zero(best.size());
        for (const auto& e : basis) v += normal(rng) * spread * e;
        MinimaxResult r = minimax_descent(space, terms, space.exp_map(best, v), 1000, -10 * tol);
        if (r.value < res.value) res = r;
      }
    }
    out.value = res.value;
    out.witness = res.point;
  }
  if (std::abs(out.value) <= tol)
    throw Error(ErrorCode::indeterminate_intersection,
                "common-intersection margin " + std::to_string(out.value) + " is within tolerance; perturb the radii");
  out.nonempty = out.value < 0;
  return out;
}

namespace {

// Nerve over balls indexed by `ids` (sorted). Cliques of pairwise-meeting balls
// are grown in increasing id order and kept only while their common intersection is nonempty.
SimplicialComplex nerve_of(const ModelSpace& space, const std::vector<int>& ids, const std::vector<Ball>& balls) {
  const std::size_t n = balls.size();
  std::vector<std::vector<std::size_t>> higher(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (balls_intersect(space, {balls[i], balls[j]}).nonempty) higher[i].push_back(j);

  std::vector<Simplex> simplices;
  std::vector<std::size_t> current;
  std::function<void(const std::vector<std::size_t>&)> grow = [&](const std::vector<std::size_t>& candidates) {
    Simplex s;
    for (std::size_t k : current) s.push_back(ids[k]);
    simplices.push_back(s);
    for (std::size_t c : candidates) {
      current.push_back(c);
      bool ok = true;
      if (current.size() >= 3) {
        std::vector<Ball> group;
        for (std::size_t k : current) group.push_back(balls[k]);
        ok = balls_intersect(space, group).nonempty;
      }
      if (ok) {
        std::vector<std::size_t> next;
        std::set_intersection(candidates.begin(), candidates.end(), higher[c].begin(), higher[c].end(),
                              std::back_inserter(next));
        grow(next);
      }
      current.pop_back();
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    current = {i};
    grow(higher[i]);
  }
  return SimplicialComplex::closure(simplices);
}

}  // namespace

SimplicialComplex build_nerve(const BallCover& cover) {
  std::vector<int> ids(cover.elements.size());
  std::iota(ids.begin(), ids.end(), 0);
  return nerve_of(cover.space, ids, cover.elements);
}

SimplicialComplex build_nerve(const AdjacencySet& adj) {
  std::vector<std::pair<int, std::size_t>> order;
  for (std::size_t i = 0; i < adj.elements.size(); ++i)
    order.push_back({adj.encode(adj.elements[i].base, adj.elements[i].group), i});
  std::sort(order.begin(), order.end());
  std::vector<int> ids;
  std::vector<Ball> balls;
  for (const auto& [id, i] : order) {
    ids.push_back(id);
    balls.push_back(adj.elements[i].ball);
  }
  return nerve_of(adj.cover.space, ids, balls);
}

AdjacencySet adjacency(const BallCover& cover, const GroupAction& action) {
  return adjacency(cover, GroupTable(cover.space, action));
}

AdjacencySet adjacency(const BallCover& cover, const GroupTable& table) {
  AdjacencySet adj;
  adj.cover = cover;
  adj.group = table;
  const auto& space = cover.space;
  double max_radius = 0.0;
  for (std::size_t o = 0; o < cover.elements.size(); ++o) {
    adj.elements.push_back({static_cast<int>(o), 0, cover.elements[o]});
    max_radius = std::max(max_radius, cover.elements[o].radius);
  }
  for (int g = 1; g < table.size(); ++g) {
    const bool outermost = table.word_length(g) == table.max_word_length();
    for (std::size_t o = 0; o < cover.elements.size(); ++o) {
      Ball moved = cover.elements[o];
      moved.center = table.element(g).apply(moved.center);
      bool meets = false;
      for (const auto& other : cover.elements) {
        const double d = space.distance(moved.center, other.center);
        if (outermost && d < moved.radius + other.radius + 2 * max_radius)
          throw Error(ErrorCode::enumeration_bound,
                      "a translate of word length " + std::to_string(table.word_length(g)) +
                          " reaches the window; raise the word-length bound");
        if (!meets && balls_intersect(space, {moved, other}).nonempty) meets = true;
      }
      if (meets) adj.elements.push_back({static_cast<int>(o), g, moved});
    }
  }
  for (std::size_t i = 0; i < adj.elements.size(); ++i)
    adj.index[adj.encode(adj.elements[i].base, adj.elements[i].group)] = i;
  return adj;
}

bool is_H_fine(const BallCover& cover, const GroupTable& table) {
  for (int g = 1; g < table.size(); ++g) {
    const bool outermost = table.word_length(g) == table.max_word_length();
    for (const auto& b : cover.elements) {
      Ball moved = b;
      moved.center = table.element(g).apply(b.center);
      if (balls_intersect(cover.space, {b, moved}).nonempty) return false;
      if (outermost && cover.space.distance(moved.center, b.center) < 4 * b.radius)
        throw Error(ErrorCode::enumeration_bound, "an outermost group element moves a ball too little to rule out overlap");
    }
  }
  return true;
}

NervePoint project_to_nerve(const AdjacencySet& adj, const SpacePoint& q) {
  std::vector<std::pair<int, double>> support;
  double total = 0.0;
  for (const auto& e : adj.elements) {
    const double tent = e.ball.radius - adj.cover.space.distance(q, e.ball.center);
    if (tent > 0) {
      support.push_back({adj.encode(e.base, e.group), tent});
      total += tent;
    }
  }
  if (support.empty()) throw Error(ErrorCode::uncovered_point, "point lies in no element of Adj(U)");
  std::sort(support.begin(), support.end());
  NervePoint out;
  for (const auto& [id, w] : support) {
    out.simplex.push_back(id);
    out.weights.push_back(w / total);
  }
  return out;
}

int locate_group_element(const AdjacencySet& adj, const SpacePoint& q) {
  for (int g = 0; g < adj.group.size(); ++g) {
    const SpacePoint p = g == 0 ? q : adj.group.element(adj.group.inverse(g)).apply(q);
    for (const auto& b : adj.cover.elements)
      if (adj.cover.space.distance(p, b.center) < b.radius) return g;
  }
  return -1;
}

NervePoint translate(const AdjacencySet& adj, int h, const NervePoint& p) {
  std::vector<std::pair<int, double>> moved;
  for (std::size_t i = 0; i < p.simplex.size(); ++i) {
    const int id = adj.translate(h, p.simplex[i]);
    if (id < 0) throw Error(ErrorCode::enumeration_bound, "translated vertex leaves the enumerated group elements");
    moved.push_back({id, p.weights[i]});
  }
  std::sort(moved.begin(), moved.end());
  NervePoint out;
  for (const auto& [id, w] : moved) {
    out.simplex.push_back(id);
    out.weights.push_back(w);
  }
  return out;
}

NervePoint project_equivariant(const AdjacencySet& adj, const SpacePoint& q) {
  const int h = locate_group_element(adj, q);
  if (h < 0) throw Error(ErrorCode::uncovered_point, "no enumerated translate of the base cover contains the point");
  if (h == 0) return project_to_nerve(adj, q);
  const SpacePoint p = adj.group.element(adj.group.inverse(h)).apply(q);
  return translate(adj, h, project_to_nerve(adj, p));
}

double diam_K_Kout(const ModelSpace& space, const GroupTable& table, const std::vector<SpacePoint>& k,
                   const std::vector<SpacePoint>& k_out, double slack) {
  const double base = diameter(space, k_out);
  double result = base;
  for (int g = 1; g < table.size(); ++g) {
    const Isometry& h = table.element(g);
    bool close = false;
    for (const auto& a : k) {
      const SpacePoint ha = h.apply(a);
      for (const auto& b : k) {
        if (space.distance(ha, b) <= slack) {
          close = true;
          break;
        }
      }
      if (close) break;
    }
    if (!close) continue;
    if (table.word_length(g) == table.max_word_length())
      throw Error(ErrorCode::enumeration_bound, "an outermost group element still meets K; raise the word-length bound");
    double d = base;
    for (const auto& a : k_out) {
      const SpacePoint ha = h.apply(a);
      for (const auto& b : k_out) d = std::max(d, space.distance(ha, b));
    }
    result = std::max(result, d);
  }
  return result;
}

}  // namespace barylab
