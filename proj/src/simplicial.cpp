#include "barylab/simplicial.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace barylab {

std::string simplex_to_string(const Simplex& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

namespace {

// Calls f on every nonempty proper face of s.
void for_each_proper_face(const Simplex& s, const std::function<void(const Simplex&)>& f) {
  const std::size_t n = s.size();
  if (n > 20) throw Error(ErrorCode::invalid_input, "simplex too large to enumerate faces");
  const unsigned long full = (1ul << n) - 1;
  Simplex face;
  for (unsigned long mask = 1; mask < full; ++mask) {
    face.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1ul << i)) face.push_back(s[i]);
    f(face);
  }
}

}  // namespace

SimplicialComplex SimplicialComplex::closure(const std::vector<Simplex>& generators) {
  std::set<Simplex, SimplexLess> all;
  for (Simplex g : generators) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.empty()) continue;
    all.insert(g);
    for_each_proper_face(g, [&](const Simplex& f) { all.insert(f); });
  }
  SimplicialComplex out;
  out.simplices_.assign(all.begin(), all.end());
  for (const auto& s : out.simplices_)
    if (s.size() == 1) out.vertices_.push_back(s[0]);
  out.index();
  return out;
}

SimplicialComplex SimplicialComplex::raw(std::vector<int> vertices, std::vector<Simplex> simplices) {
  SimplicialComplex out;
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  std::sort(simplices.begin(), simplices.end(), SimplexLess());
  simplices.erase(std::unique(simplices.begin(), simplices.end()), simplices.end());
  out.vertices_ = std::move(vertices);
  out.simplices_ = std::move(simplices);
  out.index();
  return out;
}

void SimplicialComplex::index() {
  star_.clear();
  for (std::size_t i = 0; i < simplices_.size(); ++i)
    for (int v : simplices_[i]) star_[v].push_back(i);
}

int SimplicialComplex::dimension() const {
  if (simplices_.empty()) return vertices_.empty() ? -1 : 0;
  return static_cast<int>(simplices_.back().size()) - 1;
}

bool SimplicialComplex::contains(const Simplex& s) const {
  return std::binary_search(simplices_.begin(), simplices_.end(), s, SimplexLess());
}

bool SimplicialComplex::has_vertex(int v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

std::vector<Simplex> SimplicialComplex::simplices_of_dim(int k) const {
  std::vector<Simplex> out;
  for (const auto& s : simplices_)
    if (static_cast<int>(s.size()) == k + 1) out.push_back(s);
  return out;
}

std::vector<Simplex> SimplicialComplex::cofaces(const Simplex& s) const {
  std::vector<Simplex> out;
  if (s.empty()) return out;
  auto it = star_.find(s[0]);
  if (it == star_.end()) return out;
  for (std::size_t i : it->second) {
    const Simplex& t = simplices_[i];
    if (std::includes(t.begin(), t.end(), s.begin(), s.end())) out.push_back(t);
  }
  return out;
}

std::vector<std::string> validate(const SimplicialComplex& s) {
  std::vector<std::string> problems;
  std::set<Simplex, SimplexLess> missing;
  for (const auto& t : s.simplices()) {
    if (t.empty()) {
      problems.push_back("empty tuple");
      continue;
    }
    bool sorted = true;
    for (std::size_t i = 1; i < t.size(); ++i)
      if (t[i] <= t[i - 1]) sorted = false;
    if (!sorted) {
      problems.push_back("malformed tuple " + simplex_to_string(t) + ": vertices repeat or are unsorted");
      continue;
    }
    for (int v : t)
      if (!s.has_vertex(v)) problems.push_back("tuple " + simplex_to_string(t) + " uses unknown vertex " + std::to_string(v));
    for_each_proper_face(t, [&](const Simplex& f) {
      if (!s.contains(f)) missing.insert(f);
    });
  }
  for (int v : s.vertices())
    if (!s.contains(Simplex{v})) missing.insert(Simplex{v});
  for (const auto& f : missing) problems.push_back("missing face " + simplex_to_string(f));
  return problems;
}

const Simplex& SubdivisionProvenance::of(int vertex) const {
  auto it = sources.find(vertex);
  if (it == sources.end())
    throw Error(ErrorCode::provenance_corruption, "vertex " + std::to_string(vertex) + " has no provenance");
  return it->second;
}

Subdivision barycentric_subdivision(const SimplicialComplex& s) {
  Subdivision out;
  std::map<Simplex, int> id_of;
  int next = s.vertices().empty() ? 0 : s.vertices().back() + 1;
  for (const auto& j : s.simplices()) {
    const int id = j.size() == 1 ? j[0] : next++;
    id_of[j] = id;
    out.provenance.sources[id] = j;
  }

  // Maximal chains ending at each simplex; every chain is a face of one of these.
  std::vector<Simplex> generators;
  std::function<void(const Simplex&, Simplex&)> descend = [&](const Simplex& j, Simplex& chain) {
    chain.push_back(id_of.at(j));
    if (j.size() == 1) {
      generators.push_back(chain);
    } else {
      Simplex face(j.size() - 1);
      for (std::size_t drop = 0; drop < j.size(); ++drop) {
        std::size_t k = 0;
        for (std::size_t i = 0; i < j.size(); ++i)
          if (i != drop) face[k++] = j[i];
        descend(face, chain);
      }
    }
    chain.pop_back();
  };
  for (const auto& j : s.simplices()) {
    if (s.cofaces(j).size() > 1) continue;  // not maximal
    Simplex chain;
    descend(j, chain);
  }
  out.complex = SimplicialComplex::closure(generators);
  return out;
}

SubdivisionProvenance compose(const SubdivisionProvenance& outer, const SubdivisionProvenance& inner) {
  SubdivisionProvenance out;
  for (const auto& [v, j] : outer.sources) {
    std::set<int> merged;
    for (int u : j) {
      const Simplex& base = inner.of(u);
      merged.insert(base.begin(), base.end());
    }
    out.sources[v] = Simplex(merged.begin(), merged.end());
  }
  return out;
}

SimplicialComplex room(const SimplicialComplex& s, const Simplex& sigma) {
  if (!s.contains(sigma)) throw Error(ErrorCode::unknown_simplex, "simplex " + simplex_to_string(sigma) + " is not in the complex");
  return SimplicialComplex::closure(s.cofaces(sigma));
}

std::vector<int> room_vertices(const SimplicialComplex& s, const Simplex& sigma) {
  if (!s.contains(sigma)) throw Error(ErrorCode::unknown_simplex, "simplex " + simplex_to_string(sigma) + " is not in the complex");
  std::set<int> verts;
  for (const auto& t : s.cofaces(sigma)) verts.insert(t.begin(), t.end());
  return {verts.begin(), verts.end()};
}

Simplex least_containing_simplex(const SimplicialComplex& parent, const SubdivisionProvenance& prov,
                                 const Simplex& sigma_sub) {
  std::set<int> merged;
  for (int v : sigma_sub) {
    const Simplex& j = prov.of(v);
    merged.insert(j.begin(), j.end());
  }
  Simplex out(merged.begin(), merged.end());
  if (!parent.contains(out))
    throw Error(ErrorCode::provenance_corruption, "provenance union " + simplex_to_string(out) + " spans no parent simplex");
  return out;
}

const SpacePoint& VertexMap::at(int vertex) const {
  auto it = assignment.find(vertex);
  if (it == assignment.end()) throw Error(ErrorCode::invalid_input, "vertex " + std::to_string(vertex) + " is unlabelled");
  return it->second;
}

std::vector<SpacePoint> VertexMap::images(const Simplex& s) const {
  std::vector<SpacePoint> out;
  out.reserve(s.size());
  for (int v : s) out.push_back(at(v));
  return out;
}

double map_diameter(const SimplicialComplex& s, const VertexMap& iota, bool edges_only) {
  double d = 0.0;
  for (const auto& t : s.simplices()) {
    if (edges_only && t.size() > 2) break;  // simplices are sorted by size
    d = std::max(d, diameter(iota.target, iota.images(t)));
  }
  return d;
}

}  // namespace barylab
