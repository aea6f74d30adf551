#include "doctest.h"

#include <random>
#include <set>

#include "oracles.hpp"
#include "team/comms.hpp"
#include "team/error.hpp"

using namespace team;

namespace {

Message coords(int src, int dst, double sent_at) {
  return {src, dst, MessageKind::kCoords, PositionEstimate{}, sent_at};
}

LinkGraph chain(int n) {
  LinkGraph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

}  // namespace

TEST_SUITE("comms") {

TEST_CASE("build links") {
  const Environment open({}, {-1, -1, 30, 10});
  const CommModel model;
  const std::vector<Point2> pair{{0, 0}, {5, 0}};
  CHECK(build_links(model, open, pair).edge_count() == 1);

  const Environment wall({{{2.5, -1}, {2.5, 5}}}, {-1, -1, 30, 10});
  CHECK(build_links(model, wall, pair).edge_count() == 0);

  CommModel short_range;
  short_range.comm_range = 12;
  const std::vector<Point2> three{{0, 0}, {10, 0}, {20, 0}};
  const LinkGraph g = build_links(short_range, open, three);
  CHECK(g.edge_count() == 2);
  CHECK(g.connected(0, 1));
  CHECK(g.connected(1, 2));
  CHECK_FALSE(g.connected(0, 2));
}

TEST_CASE("route") {
  const LinkGraph g = chain(3);
  CHECK(*route(g, 0, 2) == std::vector<int>{0, 1, 2});
  CHECK(*route(g, 1, 2) == std::vector<int>{1, 2});
  LinkGraph split(3);
  split.add_edge(0, 1);
  CHECK_FALSE(route(split, 0, 2).has_value());

  SUBCASE("ties resolve to the smallest id sequence") {
    LinkGraph diamond(4);
    diamond.add_edge(0, 2);
    diamond.add_edge(0, 1);
    diamond.add_edge(2, 3);
    diamond.add_edge(1, 3);
    CHECK(*route(diamond, 0, 3) == std::vector<int>{0, 1, 3});
    CHECK(*route(diamond, 3, 0) == std::vector<int>{3, 1, 0});
  }
}

TEST_CASE("routes are simple, follow edges and match breadth-first hop counts") {
  std::mt19937_64 gen(4);
  std::uniform_int_distribution<int> size(2, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = size(gen);
    const double density = 0.05 + 0.3 * u(gen);
    LinkGraph g(n);
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        if (u(gen) < density) {
          g.add_edge(a, b);
          adj[a][b] = adj[b][a] = true;
        }
      }
    }
    for (int src = 0; src < n; ++src) {
      for (int dst = 0; dst < n; ++dst) {
        if (src == dst) continue;
        const auto path = route(g, src, dst);
        const int hops = oracle::bfs_hops(adj, src, dst);
        if (hops < 0) {
          CHECK_FALSE(path.has_value());
          continue;
        }
        REQUIRE(path.has_value());
        CHECK(static_cast<int>(path->size()) - 1 == hops);
        CHECK(path->front() == src);
        CHECK(path->back() == dst);
        CHECK(std::set<int>(path->begin(), path->end()).size() == path->size());
        for (std::size_t k = 0; k + 1 < path->size(); ++k) {
          CHECK(g.connected((*path)[k], (*path)[k + 1]));
        }
      }
    }
  }
}

TEST_CASE("deliver") {
  RandomStream rng(1);
  CommModel model;
  model.per_hop_latency = 0.01;
  const LinkGraph g = chain(3);
  CHECK(*deliver(model, g, coords(0, 2, 1.0), rng) == doctest::Approx(1.02));

  CommModel lossy = model;
  lossy.drop_prob = 1.0;
  CHECK_FALSE(deliver(lossy, g, coords(0, 2, 1.0), rng).has_value());

  LinkGraph split(3);
  CHECK_FALSE(deliver(model, split, coords(0, 2, 1.0), rng).has_value());
  CHECK_THROWS_AS((void)deliver(model, g, coords(1, 1, 0.0), rng), Error);
}

TEST_CASE("per-hop drops follow the Bernoulli oracle") {
  // One hop with drop probability 0.1 delivers with probability 0.9; over 10 000
  // trials the binomial standard deviation is 0.003.
  RandomStream rng(RandomStream::derive_seed(9, 0, StreamKind::kComms));
  CommModel model;
  model.drop_prob = 0.1;
  const LinkGraph g = chain(2);
  int delivered = 0;
  for (int i = 0; i < 10000; ++i) delivered += deliver(model, g, coords(0, 1, 0.0), rng).has_value();
  CHECK(std::abs(delivered / 10000.0 - 0.9) <= 0.01);

  // Two hops must both survive: 0.81.
  const LinkGraph g3 = chain(3);
  delivered = 0;
  for (int i = 0; i < 10000; ++i) delivered += deliver(model, g3, coords(0, 2, 0.0), rng).has_value();
  CHECK(std::abs(delivered / 10000.0 - 0.81) <= 0.015);
}

TEST_CASE("lossless delivery arrives within diameter times latency") {
  RandomStream rng(2);
  CommModel model;
  const LinkGraph g = chain(6);
  for (int src = 0; src < 6; ++src) {
    for (int dst = 0; dst < 6; ++dst) {
      if (src == dst) continue;
      const auto at = deliver(model, g, coords(src, dst, 3.0), rng);
      REQUIRE(at.has_value());
      CHECK(*at <= 3.0 + 5 * model.per_hop_latency + 1e-12);
    }
  }
}

TEST_CASE("message queue releases in arrival then send order") {
  MessageQueue q;
  q.push(0.5, coords(0, 1, 0.0));
  q.push(0.3, coords(2, 1, 0.0));
  q.push(0.5, coords(3, 1, 0.0));
  q.push(0.9, coords(1, 0, 0.0));
  CHECK(q.release(0.2).empty());
  const auto out = q.release(0.5);
  REQUIRE(out.size() == 3);
  CHECK(out[0].src == 2);
  CHECK(out[1].src == 0);
  CHECK(out[2].src == 3);
  CHECK(q.size() == 1);
}

TEST_CASE("comm model validation") {
  CHECK_NOTHROW(CommModel{}.validate());
  CHECK_THROWS_AS((CommModel{30, 0.01, 1.5}).validate(), Error);
  CHECK_THROWS_AS((CommModel{0, 0.01, 0}).validate(), Error);
}

}  // TEST_SUITE
