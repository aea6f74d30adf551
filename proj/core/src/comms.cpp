#include "team/comms.hpp"

#include <algorithm>
#include <deque>

#include "team/error.hpp"

namespace team {

void CommModel::validate() const {
  if (!(comm_range > 0.0)) throw Error(ErrorCode::kConfig, "comms.comm_range must be > 0");
  if (!(per_hop_latency >= 0.0)) {
    throw Error(ErrorCode::kConfig, "comms.per_hop_latency must be >= 0");
  }
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) {
    throw Error(ErrorCode::kConfig, "comms.drop_prob must lie in [0, 1]");
  }
}

bool LinkGraph::connected(int u, int v) const {
  const auto& n = neighbors(u);
  return std::binary_search(n.begin(), n.end(), v);
}

std::size_t LinkGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& n : adjacency_) twice += n.size();
  return twice / 2;
}

void LinkGraph::add_edge(int u, int v) {
  if (u == v || u < 0 || v < 0 || u >= size() || v >= size()) {
    throw Error(ErrorCode::kDomain, "invalid link endpoints");
  }
  if (connected(u, v)) return;
  for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}}) {
    auto& n = adjacency_[static_cast<std::size_t>(a)];
    n.insert(std::lower_bound(n.begin(), n.end(), b), b);
  }
}

LinkGraph build_links(const CommModel& model, const Environment& env,
                      std::span<const Point2> positions) {
  LinkGraph g(static_cast<int>(positions.size()));
  for (std::size_t u = 0; u < positions.size(); ++u) {
    for (std::size_t v = u + 1; v < positions.size(); ++v) {
      if (distance(positions[u], positions[v]) > model.comm_range) continue;
      if (!line_of_sight(env, positions[u], positions[v])) continue;
      g.add_edge(static_cast<int>(u), static_cast<int>(v));
    }
  }
  return g;
}

std::optional<std::vector<int>> route(const LinkGraph& g, int src, int dst) {
  if (src < 0 || dst < 0 || src >= g.size() || dst >= g.size()) {
    throw Error(ErrorCode::kDomain, "route endpoint is not a node");
  }
  // Hop distances to dst; walking from src through the smallest-id neighbour one hop
  // closer gives the lexicographically smallest shortest path.
  std::vector<int> hops(static_cast<std::size_t>(g.size()), -1);
  std::deque<int> frontier{dst};
  hops[static_cast<std::size_t>(dst)] = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (int v : g.neighbors(u)) {
      if (hops[static_cast<std::size_t>(v)] >= 0) continue;
      hops[static_cast<std::size_t>(v)] = hops[static_cast<std::size_t>(u)] + 1;
      frontier.push_back(v);
    }
  }
  if (hops[static_cast<std::size_t>(src)] < 0) return std::nullopt;

  std::vector<int> path{src};
  int at = src;
  while (at != dst) {
    const int want = hops[static_cast<std::size_t>(at)] - 1;
    for (int v : g.neighbors(at)) {
      if (hops[static_cast<std::size_t>(v)] == want) {
        at = v;
        break;
      }
    }
    path.push_back(at);
  }
  return path;
}

std::optional<double> deliver(const CommModel& model, const LinkGraph& g, const Message& msg,
                              RandomStream& rng) {
  if (msg.src == msg.dst) throw Error(ErrorCode::kDomain, "message source equals destination");
  const auto path = route(g, msg.src, msg.dst);
  if (!path) return std::nullopt;
  const auto n_hops = static_cast<int>(path->size()) - 1;
  if (model.drop_prob > 0.0) {
    for (int h = 0; h < n_hops; ++h) {
      if (rng.bernoulli(model.drop_prob)) return std::nullopt;
    }
  }
  return msg.sent_at + n_hops * model.per_hop_latency;
}

void MessageQueue::push(double arrival, Message msg) {
  heap_.push(Entry{arrival, next_seq_++, std::move(msg)});
}

std::vector<Message> MessageQueue::release(double t) {
  std::vector<Message> out;
  while (!heap_.empty() && heap_.top().arrival <= t + 1e-9) {
    out.push_back(heap_.top().msg);
    heap_.pop();
  }
  return out;
}

}  // namespace team
