#include <doctest.h>

#include <chrono>
#include <deque>
#include <cmath>
#include <sstream>
#include <vector>

#include "tomo/errors.hpp"
#include "tomo/maxflow.hpp"
#include "tomo/rng.hpp"

using namespace tomo;

namespace {

// Exhaustive min cut over all source-side subsets of the non-terminal nodes.
double brute_force_min_cut(const FlowNetwork& net) {
  const int k = net.num_nodes() - 2;
  REQUIRE(k <= 12);
  double best = 1e300;
  for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
    const auto side = [&](FlowNetwork::NodeId v) {
      if (v == net.source()) return true;
      if (v == net.sink()) return false;
      return ((mask >> (v - 2)) & 1) != 0;
    };
    double cut = 0.0;
    for (const auto& arc : net.arcs())
      if (side(arc.from) && !side(arc.to))
        cut += arc.capacity == FlowNetwork::kInf ? 1e12 : arc.capacity;
    best = std::min(best, cut);
  }
  return best;
}

double cut_cost_of_labels(const FlowNetwork& net,
                          const std::vector<std::uint8_t>& source_side) {
  double cut = 0.0;
  for (const auto& arc : net.arcs())
    if (source_side[arc.from] && !source_side[arc.to]) cut += arc.capacity;
  return cut;
}

FlowNetwork random_graph(Rng& rng, int non_terminals, int extra_arcs) {
  FlowNetwork net;
  const auto first = net.add_nodes(non_terminals);
  for (int i = 0; i < non_terminals; ++i) {
    net.add_arc(net.source(), first + i, rng.uniform_int(0, 7), 0);
    net.add_arc(first + i, net.sink(), rng.uniform_int(0, 7), 0);
  }
  for (int e = 0; e < extra_arcs; ++e) {
    const int a = rng.uniform_int(0, non_terminals - 1);
    int b = rng.uniform_int(0, non_terminals - 1);
    if (a == b) b = (b + 1) % non_terminals;
    net.add_arc(first + a, first + b, rng.uniform_int(0, 7),
                rng.uniform_int(0, 7));
  }
  return net;
}

}  // namespace

TEST_CASE("single arc s->t") {
  FlowNetwork net;
  net.add_arc(net.source(), net.sink(), 3.0, 0.0);
  const CutResult cut = net.max_flow();
  CHECK(cut.flow == doctest::Approx(3.0));
  CHECK(cut.source_side[net.source()]);
  CHECK(!cut.source_side[net.sink()]);
}

TEST_CASE("two disjoint paths bottleneck at 2 + 1") {
  FlowNetwork net;
  const auto x = net.add_node();
  const auto y = net.add_node();
  net.add_arc(net.source(), x, 2.0, 0.0);
  net.add_arc(x, net.sink(), 5.0, 0.0);
  net.add_arc(net.source(), y, 3.0, 0.0);
  net.add_arc(y, net.sink(), 1.0, 0.0);
  const CutResult cut = net.max_flow();
  CHECK(cut.flow == doctest::Approx(3.0));
}

TEST_CASE("duplicate arcs are additive") {
  FlowNetwork doubled;
  const auto v1 = doubled.add_node();
  doubled.add_arc(doubled.source(), v1, 1.0, 0.0);
  doubled.add_arc(doubled.source(), v1, 1.0, 0.0);
  doubled.add_arc(v1, doubled.sink(), 5.0, 0.0);

  FlowNetwork merged;
  const auto v2 = merged.add_node();
  merged.add_arc(merged.source(), v2, 2.0, 0.0);
  merged.add_arc(v2, merged.sink(), 5.0, 0.0);

  CHECK(doubled.max_flow().flow == doctest::Approx(merged.max_flow().flow));
}

TEST_CASE("disconnected terminals give zero flow") {
  FlowNetwork net;
  net.add_node();
  const CutResult cut = net.max_flow();
  CHECK(cut.flow == 0.0);
  CHECK(cut.source_side[net.source()]);
  CHECK(!cut.source_side[net.sink()]);
}

TEST_CASE("negative capacity rejected") {
  FlowNetwork net;
  const auto v = net.add_node();
  CHECK_THROWS_AS(net.add_arc(net.source(), v, -1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(net.add_arc(v, v, 1.0, 0.0), ConfigError);
}

TEST_CASE("random graphs match exhaustive min cut exactly") {
  Rng rng(2029);
  for (int rep = 0; rep < 60; ++rep) {
    const int k = rng.uniform_int(2, 10);
    FlowNetwork net = random_graph(rng, k, rng.uniform_int(0, 2 * k));
    const CutResult cut = net.max_flow();
    const double oracle = brute_force_min_cut(net);
    // Integer capacities: equality must be exact.
    CHECK(cut.flow == oracle);
    // Max-flow min-cut identity on the returned labeling.
    CHECK(cut.flow == cut_cost_of_labels(net, cut.source_side));
  }
}

TEST_CASE("flow conservation and capacity limits") {
  Rng rng(999);
  FlowNetwork net = random_graph(rng, 9, 20);
  const CutResult cut = net.max_flow();
  const auto& arcs = net.arcs();
  std::vector<double> net_flow(net.num_nodes(), 0.0);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    // Cancel opposite flows on the arc pair before checking capacity.
    if (i % 2 == 0) {
      const double f = cut.arc_flow[i] - cut.arc_flow[i + 1];
      const double fwd = f > 0 ? f : 0.0;
      const double bwd = f < 0 ? -f : 0.0;
      CHECK(fwd <= arcs[i].capacity + 1e-9);
      CHECK(bwd <= arcs[i + 1].capacity + 1e-9);
      net_flow[arcs[i].from] -= f;
      net_flow[arcs[i].to] += f;
    }
  }
  for (int v = 2; v < net.num_nodes(); ++v)
    CHECK(std::abs(net_flow[v]) < 1e-9);
  CHECK(net_flow[net.sink()] == doctest::Approx(cut.flow));
}

TEST_CASE("infinite arcs are never severed when a finite cut exists") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    FlowNetwork net = random_graph(rng, 8, 10);
    // Chain of INF arcs through a random subset of nodes.
    for (int i = 0; i < 4; ++i) {
      const auto a = 2 + rng.uniform_int(0, 7);
      auto b = 2 + rng.uniform_int(0, 7);
      if (a == b) b = 2 + (b - 2 + 1) % 8;
      net.add_arc(a, b, FlowNetwork::kInf, 0.0);
    }
    const CutResult cut = net.max_flow();
    for (const auto& arc : net.arcs())
      if (arc.capacity == FlowNetwork::kInf)
        CHECK(!(cut.source_side[arc.from] && !cut.source_side[arc.to]));
    CHECK(cut.flow < cut.inf_sentinel);
  }
}

TEST_CASE("one-way infinite constraint pins a node to the source side") {
  FlowNetwork net;
  const auto a = net.add_node();
  net.add_arc(net.source(), a, FlowNetwork::kInf, 0.0);
  net.add_arc(a, net.sink(), 3.0, 0.0);
  const CutResult cut = net.max_flow();
  CHECK(cut.flow == doctest::Approx(3.0));
  CHECK(cut.source_side[a]);  // the infinite arc cannot be severed
}

TEST_CASE("deterministic labeling for a fixed insertion order") {
  Rng rng(7);
  FlowNetwork net = random_graph(rng, 10, 15);
  const CutResult c1 = net.max_flow();
  const CutResult c2 = net.max_flow();
  CHECK(c1.flow == c2.flow);
  CHECK(c1.source_side == c2.source_side);
}

TEST_CASE("dimacs dump is parseable") {
  FlowNetwork net;
  const auto v = net.add_node();
  net.add_arc(net.source(), v, 2.5, 0.0);
  net.add_arc(v, net.sink(), FlowNetwork::kInf, 0.0);
  std::ostringstream os;
  net.write_dimacs(os);
  std::istringstream is(os.str());
  std::string tag;
  is >> tag;
  CHECK(tag == "p");
  std::string max_kw;
  int nodes = 0;
  std::size_t arcs = 0;
  is >> max_kw >> nodes >> arcs;
  CHECK(max_kw == "max");
  CHECK(nodes == 3);
  CHECK(arcs == 2);
}

namespace {

// Independent reference: plain Edmonds-Karp over the same arc list.
double reference_max_flow(const FlowNetwork& net) {
  const auto& arcs = net.arcs();
  std::vector<double> res(arcs.size());
  double finite = 0.0;
  for (const auto& a : arcs)
    if (a.capacity != FlowNetwork::kInf) finite += a.capacity;
  for (std::size_t i = 0; i < arcs.size(); ++i)
    res[i] = arcs[i].capacity == FlowNetwork::kInf ? finite + 1.0
                                                   : arcs[i].capacity;
  std::vector<std::vector<std::size_t>> out(net.num_nodes());
  for (std::size_t i = 0; i < arcs.size(); ++i) out[arcs[i].from].push_back(i);

  double flow = 0.0;
  while (true) {
    std::vector<std::int64_t> via(net.num_nodes(), -1);
    std::deque<FlowNetwork::NodeId> queue{net.source()};
    via[net.source()] = -2;
    bool found = false;
    while (!queue.empty() && !found) {
      const auto v = queue.front();
      queue.pop_front();
      for (std::size_t a : out[v]) {
        if (res[a] <= 0.0 || via[arcs[a].to] != -1) continue;
        via[arcs[a].to] = static_cast<std::int64_t>(a);
        if (arcs[a].to == net.sink()) {
          found = true;
          break;
        }
        queue.push_back(arcs[a].to);
      }
    }
    if (!found) return flow;
    double delta = 1e300;
    for (auto v = net.sink(); v != net.source(); v = arcs[via[v]].from)
      delta = std::min(delta, res[via[v]]);
    for (auto v = net.sink(); v != net.source(); v = arcs[via[v]].from) {
      res[via[v]] -= delta;
      res[via[v] ^ 1] += delta;
    }
    flow += delta;
  }
}

}  // namespace

TEST_CASE("BK agrees with an independent reference on mid-size graphs") {
  Rng rng(60601);
  for (int rep = 0; rep < 30; ++rep) {
    const int k = rng.uniform_int(20, 120);
    FlowNetwork net;
    const auto first = net.add_nodes(k);
    for (int i = 0; i < k; ++i) {
      if (rng.uniform01() < 0.5)
        net.add_arc(net.source(), first + i, rng.uniform_int(0, 9), 0);
      if (rng.uniform01() < 0.5)
        net.add_arc(first + i, net.sink(), rng.uniform_int(0, 9), 0);
    }
    const int extra = rng.uniform_int(k, 4 * k);
    for (int e = 0; e < extra; ++e) {
      const int a = rng.uniform_int(0, k - 1);
      int b = rng.uniform_int(0, k - 1);
      if (a == b) b = (b + 1) % k;
      const bool hard = rng.uniform01() < 0.1;
      net.add_arc(first + a, first + b,
                  hard ? FlowNetwork::kInf : rng.uniform_int(0, 9),
                  rng.uniform_int(0, 9));
    }
    const CutResult cut = net.max_flow();
    CHECK(cut.flow == reference_max_flow(net));  // integers: exact
    CHECK(cut.flow == cut_cost_of_labels(net, cut.source_side));
  }
}

TEST_CASE("runtime report on grid-shaped graphs" * doctest::skip(false)) {
  // Near-linear empirical scaling; reported, not asserted.
  for (int side : {8, 12, 16}) {
    Rng rng(side);
    FlowNetwork net;
    const int n = side * side * side;
    const auto first = net.add_nodes(n);
    const auto id = [&](int x, int y, int z) {
      return first + (x * side + y) * side + z;
    };
    for (int x = 0; x < side; ++x)
      for (int y = 0; y < side; ++y)
        for (int z = 0; z < side; ++z) {
          net.add_arc(net.source(), id(x, y, z), rng.uniform_int(0, 5), 0);
          net.add_arc(id(x, y, z), net.sink(), rng.uniform_int(0, 5), 0);
          if (x + 1 < side) net.add_arc(id(x, y, z), id(x + 1, y, z), 1.0, 1.0);
          if (y + 1 < side) net.add_arc(id(x, y, z), id(x, y + 1, z), 1.0, 1.0);
          if (z + 1 < side)
            net.add_arc(id(x, y, z + 1), id(x, y, z), FlowNetwork::kInf, 0.0);
        }
    const auto start = std::chrono::steady_clock::now();
    const CutResult cut = net.max_flow();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    MESSAGE("maxflow nodes=" << n << " flow=" << cut.flow << " ms=" << ms);
    CHECK(cut.flow >= 0.0);
  }
}
