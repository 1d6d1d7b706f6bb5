#include "treemass/tree.hpp"

#include <ostream>
#include <string>

#include "treemass/errors.hpp"

namespace treemass {

Forest Forest::create() {
  Forest f;
  f.vertices_.push_back(Vertex{0, std::nullopt, 0});
  f.children_.emplace_back();
  f.roots_.push_back(0);
  return f;
}

VertexId Forest::attach(VertexId parent, std::uint64_t birth_step) {
  if (parent >= vertices_.size())
    throw UnknownParent("no vertex " + std::to_string(parent));
  if (birth_step < current_step_)
    throw TimeViolation("attachment into the past");
  if (vertices_[parent].birth_step >= birth_step)
    throw TimeViolation("parent born at step " +
                        std::to_string(vertices_[parent].birth_step) +
                        " is not an eligible target at step " +
                        std::to_string(birth_step));
  const VertexId id = vertices_.size();
  vertices_.push_back(Vertex{id, parent, birth_step});
  children_.emplace_back();
  children_[parent].push_back(id);
  return id;
}

VertexId Forest::add_root(std::uint64_t birth_step) {
  if (birth_step < current_step_)
    throw TimeViolation("root creation into the past");
  const VertexId id = vertices_.size();
  vertices_.push_back(Vertex{id, std::nullopt, birth_step});
  children_.emplace_back();
  roots_.push_back(id);
  return id;
}

void Forest::advance_to(std::uint64_t step) {
  if (step < current_step_) throw InvalidInput("current_step is monotone");
  current_step_ = step;
}

void Forest::check_vertex(VertexId v) const {
  if (v >= vertices_.size())
    throw UnknownVertex("no vertex " + std::to_string(v));
}

const std::vector<VertexId>& Forest::cluster_members(VertexId v) const {
  check_vertex(v);
  return children_[v];
}

std::size_t Forest::in_degree(VertexId v) const {
  check_vertex(v);
  return children_[v].size();
}

VertexStatus Forest::status(VertexId v) const {
  const std::size_t k = in_degree(v);
  return VertexStatus{k == 0, k > 0, k};
}

void Forest::write_edge_tsv(std::ostream& out) const {
  for (const Vertex& v : vertices_) {
    if (!v.parent) continue;
    out << v.id << '\t' << *v.parent << '\t' << v.birth_step << '\n';
  }
}

void Forest::write_dot(std::ostream& out) const {
  out << "digraph forest {\n";
  for (const Vertex& v : vertices_) out << "  v" << v.id << ";\n";
  for (const Vertex& v : vertices_) {
    if (!v.parent) continue;
    out << "  v" << v.id << " -> v" << *v.parent << ";\n";
  }
  out << "}\n";
}

std::vector<LeafCluster> eligible_leaf_clusters(const Forest& forest) {
  std::vector<LeafCluster> out;
  for (VertexId r : forest.roots()) {
    if (forest.in_degree(r) == 0)
      out.push_back(LeafCluster{std::nullopt, {r}});
  }
  for (const Vertex& v : forest.vertices()) {
    std::vector<VertexId> leaves;
    for (VertexId c : forest.cluster_members(v.id)) {
      if (forest.in_degree(c) == 0) leaves.push_back(c);
    }
    if (!leaves.empty())
      out.push_back(LeafCluster{v.id, std::move(leaves)});
  }
  return out;
}

}  // namespace treemass
