#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace treemass {

using VertexId = std::size_t;

struct Vertex {
  VertexId id;
  std::optional<VertexId> parent;  // absent for roots
  std::uint64_t birth_step;
};

struct VertexStatus {
  bool is_leaf;
  bool is_deep;
  std::size_t in_degree;
};

// A cluster that can still accept leaf attachments: the owner's children that
// are themselves leaves. A still-leaf root is exposed as a synthetic cluster
// with no owner, so the first arrival can target it.
struct LeafCluster {
  std::optional<VertexId> owner;
  std::vector<VertexId> leaves;
};

// Append-only forest of attachment trees. Ids are dense and increase in birth
// order, which doubles as a topological order: a parent always has a smaller
// id and a strictly smaller birth step than its children. One growth engine
// mutates a Forest at a time; reads between mutations are safe.
class Forest {
 public:
  // One root, id 0, birth step 0, current step 0.
  static Forest create();

  // Appends a vertex attached to `parent`. Requires birth_step >= the current
  // step (TimeViolation otherwise, also when the parent was born in the same
  // or a later step) and an existing parent (UnknownParent). Returns the new
  // dense id. Does not advance current_step; engines advance explicitly so a
  // zero-arrival step still moves time forward.
  VertexId attach(VertexId parent, std::uint64_t birth_step);

  // Appends a parentless vertex (a new root).
  VertexId add_root(std::uint64_t birth_step);

  // Monotone; InvalidInput when moving backwards.
  void advance_to(std::uint64_t step);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<VertexId>& roots() const { return roots_; }
  std::uint64_t current_step() const { return current_step_; }
  std::size_t edge_count() const { return vertices_.size() - roots_.size(); }

  // Children of v in id order ("the cluster of v"); empty for leaves.
  const std::vector<VertexId>& cluster_members(VertexId v) const;

  std::size_t in_degree(VertexId v) const;
  VertexStatus status(VertexId v) const;

  // TSV lines "child<TAB>parent<TAB>birth_step", one per edge, in child id
  // order. Roots carry no edge; counts live in the stats export.
  void write_edge_tsv(std::ostream& out) const;

  // One digraph; node lines for every vertex, then child -> parent edges,
  // both in id order.
  void write_dot(std::ostream& out) const;

 private:
  Forest() = default;
  void check_vertex(VertexId v) const;

  std::vector<Vertex> vertices_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<VertexId> roots_;
  std::uint64_t current_step_ = 0;
};

// Clusters that can still receive a leaf attachment, in deterministic order:
// synthetic entries for still-leaf roots first (by root id), then owners with
// at least one leaf child (by owner id).
std::vector<LeafCluster> eligible_leaf_clusters(const Forest& forest);

}  // namespace treemass
