#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace tomo {

struct CutResult {
  double flow = 0.0;
  // Per-node side of the minimum cut; source side = nodes reachable from s
  // in the residual graph, which is the pointwise-minimal minimum cut.
  std::vector<std::uint8_t> source_side;
  // Flow carried by each directed arc, aligned with FlowNetwork::arcs().
  std::vector<double> arc_flow;
  // Finite stand-in used for kInf capacities during the solve.
  double inf_sentinel = 0.0;
};

// Directed capacitated s-t flow network. Arcs are registered in pairs; the
// reverse arc of arc i is i^1. Nodes 0 and 1 are the source and sink.
class FlowNetwork {
 public:
  using NodeId = std::int32_t;
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  struct Arc {
    NodeId from = 0;
    NodeId to = 0;
    double capacity = 0.0;
  };

  FlowNetwork() { nodes_ = 2; }

  NodeId source() const { return 0; }
  NodeId sink() const { return 1; }

  NodeId add_node() { return nodes_++; }
  // Adds `count` nodes, returns the first id.
  NodeId add_nodes(int count) {
    NodeId first = nodes_;
    nodes_ += count;
    return first;
  }

  void add_arc(NodeId a, NodeId b, double cap_ab, double cap_ba);

  int num_nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  // Maximum flow / minimum cut via Boykov-Kolmogorov dual-tree growth.
  // Deterministic for a fixed arc insertion order. kInf capacities are
  // replaced by (sum of finite capacities + 1) during the solve.
  CutResult max_flow() const;

  // Debug dump in DIMACS max-flow format (1-based node ids, kInf
  // materialized like in the solver).
  void write_dimacs(std::ostream& os) const;

 private:
  NodeId nodes_ = 2;
  std::vector<Arc> arcs_;
};

}  // namespace tomo
