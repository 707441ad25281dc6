#include "tomo/maxflow.hpp"

#include <cmath>
#include <deque>
#include <ostream>

#include "tomo/errors.hpp"

namespace tomo {

void FlowNetwork::add_arc(NodeId a, NodeId b, double cap_ab, double cap_ba) {
  if (a < 0 || a >= nodes_ || b < 0 || b >= nodes_)
    throw ConfigError("add_arc: invalid node handle");
  if (a == b) throw ConfigError("add_arc: self loop");
  const bool bad_ab = !(cap_ab >= 0.0);  // catches negatives and NaN
  const bool bad_ba = !(cap_ba >= 0.0);
  if (bad_ab || bad_ba) throw ConfigError("add_arc: negative capacity");
  arcs_.push_back({a, b, cap_ab});
  arcs_.push_back({b, a, cap_ba});
}

namespace {

constexpr std::int64_t kNoArc = -1;
constexpr std::int64_t kTerminal = -2;
constexpr std::int64_t kOrphan = -3;

enum class Tree : std::uint8_t { kFree = 0, kSource, kSink };

// Boykov-Kolmogorov max-flow: grow the source and sink search trees until
// they touch, augment along the bridged path, then re-adopt the orphans the
// saturated arcs left behind. A residual BFS at the end both labels the cut
// sides and mops up any path the tree heuristics may have left.
class BkSolver {
 public:
  BkSolver(const FlowNetwork& net, CutResult* out) : net_(net), out_(out) {}

  void solve() {
    build();

    tree_[s()] = Tree::kSource;
    tree_[t()] = Tree::kSink;
    parent_[s()] = kTerminal;
    parent_[t()] = kTerminal;
    activate(s());
    activate(t());

    double flow = 0.0;
    while (true) {
      const std::int64_t bridge = grow();
      if (bridge == kNoArc) break;
      ++time_;
      flow += augment(bridge);
      adopt();
    }
    flow += finish_with_bfs();

    out_->flow = flow;
    label_reachable();
    out_->arc_flow.resize(net_.arcs().size());
    for (std::size_t i = 0; i < net_.arcs().size(); ++i) {
      const double pushed = cap_[i] - res_[i];
      out_->arc_flow[i] = pushed > 0 ? pushed : 0.0;
    }
    out_->inf_sentinel = sentinel_;
  }

 private:
  FlowNetwork::NodeId s() const { return net_.source(); }
  FlowNetwork::NodeId t() const { return net_.sink(); }

  void build() {
    const auto& arcs = net_.arcs();
    const int n = net_.num_nodes();

    double finite_sum = 0.0;
    for (const auto& a : arcs)
      if (a.capacity != FlowNetwork::kInf) finite_sum += a.capacity;
    sentinel_ = finite_sum + 1.0;

    cap_.resize(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i)
      cap_[i] = arcs[i].capacity == FlowNetwork::kInf ? sentinel_
                                                      : arcs[i].capacity;
    res_ = cap_;

    // CSR adjacency over directed arcs.
    first_.assign(n + 1, 0);
    for (const auto& a : arcs) ++first_[a.from + 1];
    for (int v = 0; v < n; ++v) first_[v + 1] += first_[v];
    adj_.resize(arcs.size());
    std::vector<std::int64_t> cursor(first_.begin(), first_.end() - 1);
    for (std::size_t i = 0; i < arcs.size(); ++i)
      adj_[cursor[arcs[i].from]++] = static_cast<std::int64_t>(i);

    tree_.assign(n, Tree::kFree);
    parent_.assign(n, kNoArc);
    ts_.assign(n, 0);
    dist_.assign(n, 0);
    cur_arc_.assign(n, 0);
    in_active_.assign(n, false);
  }

  FlowNetwork::NodeId arc_to(std::int64_t a) const {
    return net_.arcs()[static_cast<std::size_t>(a)].to;
  }
  FlowNetwork::NodeId arc_from(std::int64_t a) const {
    return net_.arcs()[static_cast<std::size_t>(a)].from;
  }
  static std::int64_t rev(std::int64_t a) { return a ^ 1; }

  void activate(FlowNetwork::NodeId v) {
    if (!in_active_[v]) {
      in_active_[v] = true;
      cur_arc_[v] = first_[v];
      active_.push_back(v);
    }
  }

  // Residual capacity of the arc that grows tree `tr` from node v across
  // out-arc a: the forward arc for the source tree, the reverse for the sink
  // tree.
  double grow_res(Tree tr, std::int64_t a) const {
    return tr == Tree::kSource ? res_[a] : res_[rev(a)];
  }

  // Returns a bridge arc (directed source tree -> sink tree) or kNoArc.
  std::int64_t grow() {
    while (!active_.empty()) {
      const FlowNetwork::NodeId v = active_.front();
      if (!in_active_[v] || tree_[v] == Tree::kFree) {
        active_.pop_front();
        in_active_[v] = false;
        continue;
      }
      const Tree tr = tree_[v];
      for (std::int64_t& i = cur_arc_[v]; i < first_[v + 1]; ++i) {
        const std::int64_t a = adj_[i];
        if (grow_res(tr, a) <= 0.0) continue;
        const FlowNetwork::NodeId w = arc_to(a);
        if (tree_[w] == Tree::kFree) {
          tree_[w] = tr;
          parent_[w] = tr == Tree::kSource ? a : rev(a);
          ts_[w] = ts_[v];
          dist_[w] = dist_[v] + 1;
          activate(w);
        } else if (tree_[w] != tr) {
          // Trees touch; this node's scan resumes after the augmentation.
          return tr == Tree::kSource ? a : rev(a);
        } else if (ts_[w] <= ts_[v] && dist_[w] > dist_[v] + 1) {
          // Reparent to the closer root.
          parent_[w] = tr == Tree::kSource ? a : rev(a);
          ts_[w] = ts_[v];
          dist_[w] = dist_[v] + 1;
        }
      }
      active_.pop_front();
      in_active_[v] = false;
    }
    return kNoArc;
  }

  // Pushes the bottleneck along s ~> bridge ~> t; saturated parent arcs
  // orphan their child node.
  double augment(std::int64_t bridge) {
    double delta = res_[bridge];
    for (FlowNetwork::NodeId v = arc_from(bridge); parent_[v] != kTerminal;
         v = arc_from(parent_[v]))
      delta = std::min(delta, res_[parent_[v]]);
    for (FlowNetwork::NodeId v = arc_to(bridge); parent_[v] != kTerminal;
         v = arc_to(parent_[v]))
      delta = std::min(delta, res_[parent_[v]]);

    res_[bridge] -= delta;
    res_[rev(bridge)] += delta;
    for (FlowNetwork::NodeId v = arc_from(bridge); parent_[v] != kTerminal;) {
      const std::int64_t a = parent_[v];
      res_[a] -= delta;
      res_[rev(a)] += delta;
      const FlowNetwork::NodeId up = arc_from(a);
      if (res_[a] <= 0.0) make_orphan(v);
      v = up;
    }
    for (FlowNetwork::NodeId v = arc_to(bridge); parent_[v] != kTerminal;) {
      const std::int64_t a = parent_[v];
      res_[a] -= delta;
      res_[rev(a)] += delta;
      const FlowNetwork::NodeId down = arc_to(a);
      if (res_[a] <= 0.0) make_orphan(v);
      v = down;
    }
    return delta;
  }

  void make_orphan(FlowNetwork::NodeId v) {
    parent_[v] = kOrphan;
    orphans_.push_back(v);
  }

  // Walks v's parent chain; true when it ends at a terminal. Nodes on the
  // walk get their root distance stamped for reuse within this pass.
  bool rooted(FlowNetwork::NodeId v, std::int64_t* out_dist) {
    walk_.clear();
    std::int64_t d = -1;
    FlowNetwork::NodeId u = v;
    while (true) {
      if (ts_[u] == time_) {
        d = dist_[u];
        break;
      }
      const std::int64_t a = parent_[u];
      if (a == kTerminal) {
        d = 0;
        ts_[u] = time_;
        dist_[u] = 0;
        break;
      }
      if (a == kNoArc || a == kOrphan) return false;
      walk_.push_back(u);
      u = tree_[u] == Tree::kSource ? arc_from(a) : arc_to(a);
    }
    for (auto it = walk_.rbegin(); it != walk_.rend(); ++it) {
      ++d;
      ts_[*it] = time_;
      dist_[*it] = d;
    }
    *out_dist = d;
    return true;
  }

  void adopt() {
    while (!orphans_.empty()) {
      const FlowNetwork::NodeId v = orphans_.front();
      orphans_.pop_front();
      if (tree_[v] == Tree::kFree) continue;
      const Tree tr = tree_[v];

      // A new parent must sit in the same tree behind an unsaturated arc of
      // the right orientation and still be rooted at its terminal.
      std::int64_t best_arc = kNoArc;
      std::int64_t best_dist = 0;
      for (std::int64_t i = first_[v]; i < first_[v + 1]; ++i) {
        const std::int64_t a = adj_[i];
        const std::int64_t link = tr == Tree::kSource ? rev(a) : a;
        if (res_[link] <= 0.0) continue;
        const FlowNetwork::NodeId u = arc_to(a);
        if (tree_[u] != tr) continue;
        std::int64_t d = 0;
        if (!rooted(u, &d)) continue;
        if (best_arc == kNoArc || d + 1 < best_dist) {
          best_arc = link;
          best_dist = d + 1;
        }
      }

      if (best_arc != kNoArc) {
        parent_[v] = best_arc;
        ts_[v] = time_;
        dist_[v] = best_dist;
        continue;
      }

      // No parent: v leaves the tree. Same-tree neighbors touching v get
      // another chance to grow; children of v become orphans themselves.
      for (std::int64_t i = first_[v]; i < first_[v + 1]; ++i) {
        const std::int64_t a = adj_[i];
        const FlowNetwork::NodeId u = arc_to(a);
        if (tree_[u] != tr) continue;
        const std::int64_t link = tr == Tree::kSource ? rev(a) : a;
        if (res_[link] > 0.0) activate(u);
        const std::int64_t pu = parent_[u];
        if (pu >= 0) {
          const FlowNetwork::NodeId pnode =
              tr == Tree::kSource ? arc_from(pu) : arc_to(pu);
          if (pnode == v) make_orphan(u);
        }
      }
      tree_[v] = Tree::kFree;
      in_active_[v] = false;
    }
  }

  // Plain BFS augmentation on whatever residual graph the tree phase left.
  // Normally finds nothing and costs one sweep.
  double finish_with_bfs() {
    double extra = 0.0;
    const int n = net_.num_nodes();
    std::vector<std::int64_t> via(n);
    while (true) {
      std::fill(via.begin(), via.end(), kNoArc);
      via[s()] = kTerminal;
      std::deque<FlowNetwork::NodeId> queue{s()};
      bool found = false;
      while (!queue.empty() && !found) {
        const FlowNetwork::NodeId v = queue.front();
        queue.pop_front();
        for (std::int64_t i = first_[v]; i < first_[v + 1]; ++i) {
          const std::int64_t a = adj_[i];
          if (res_[a] <= 0.0) continue;
          const FlowNetwork::NodeId w = arc_to(a);
          if (via[w] != kNoArc) continue;
          via[w] = a;
          if (w == t()) {
            found = true;
            break;
          }
          queue.push_back(w);
        }
      }
      if (!found) return extra;
      double delta = FlowNetwork::kInf;
      for (FlowNetwork::NodeId v = t(); v != s(); v = arc_from(via[v]))
        delta = std::min(delta, res_[via[v]]);
      for (FlowNetwork::NodeId v = t(); v != s(); v = arc_from(via[v])) {
        res_[via[v]] -= delta;
        res_[rev(via[v])] += delta;
      }
      extra += delta;
    }
  }

  // Final cut sides: BFS over residual arcs from the source.
  void label_reachable() {
    const int n = net_.num_nodes();
    out_->source_side.assign(n, 0);
    std::deque<FlowNetwork::NodeId> queue;
    out_->source_side[s()] = 1;
    queue.push_back(s());
    while (!queue.empty()) {
      const FlowNetwork::NodeId v = queue.front();
      queue.pop_front();
      for (std::int64_t i = first_[v]; i < first_[v + 1]; ++i) {
        const std::int64_t a = adj_[i];
        if (res_[a] <= 0.0) continue;
        const FlowNetwork::NodeId w = arc_to(a);
        if (!out_->source_side[w]) {
          out_->source_side[w] = 1;
          queue.push_back(w);
        }
      }
    }
  }

  const FlowNetwork& net_;
  CutResult* out_;
  double sentinel_ = 0.0;
  std::vector<double> cap_, res_;
  std::vector<std::int64_t> first_, adj_;
  std::vector<Tree> tree_;
  std::vector<std::int64_t> parent_;
  std::vector<std::int64_t> ts_, dist_, cur_arc_;
  std::vector<bool> in_active_;
  std::deque<FlowNetwork::NodeId> active_, orphans_;
  std::vector<FlowNetwork::NodeId> walk_;
  std::int64_t time_ = 1;
};

}  // namespace

CutResult FlowNetwork::max_flow() const {
  CutResult result;
  BkSolver solver(*this, &result);
  solver.solve();
  return result;
}

void FlowNetwork::write_dimacs(std::ostream& os) const {
  double finite_sum = 0.0;
  for (const auto& a : arcs_)
    if (a.capacity != kInf) finite_sum += a.capacity;
  const double sentinel = finite_sum + 1.0;

  std::size_t count = 0;
  for (const auto& a : arcs_)
    if (a.capacity > 0.0) ++count;
  os << "p max " << nodes_ << ' ' << count << '\n';
  os << "n " << source() + 1 << " s\n";
  os << "n " << sink() + 1 << " t\n";
  for (const auto& a : arcs_) {
    if (a.capacity <= 0.0) continue;
    const double cap = a.capacity == kInf ? sentinel : a.capacity;
    os << "a " << a.from + 1 << ' ' << a.to + 1 << ' ' << cap << '\n';
  }
}

}  // namespace tomo
