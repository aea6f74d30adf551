#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <variant>
#include <vector>

#include "team/geometry.hpp"
#include "team/occupancy_grid.hpp"
#include "team/random.hpp"
#include "team/trilateration.hpp"
#include "team/world.hpp"

namespace team {

struct CommModel {
  double comm_range = 30.0;
  double per_hop_latency = 0.01;
  /// Probability that any single hop loses the message.
  double drop_prob = 0.0;

  void validate() const;
};

/// Undirected connectivity among nodes 0..n-1 (robots first, the sink last).
class LinkGraph {
 public:
  explicit LinkGraph(int n_nodes = 0) : adjacency_(static_cast<std::size_t>(n_nodes)) {}

  int size() const { return static_cast<int>(adjacency_.size()); }
  /// Neighbours in increasing id order.
  const std::vector<int>& neighbors(int node) const {
    return adjacency_[static_cast<std::size_t>(node)];
  }
  bool connected(int u, int v) const;
  std::size_t edge_count() const;
  void add_edge(int u, int v);

 private:
  std::vector<std::vector<int>> adjacency_;
};

/// Edge (u, v) iff the nodes are within comm_range and have line of sight.
LinkGraph build_links(const CommModel& model, const Environment& env,
                      std::span<const Point2> positions);

/// Minimum-hop path from src to dst, lexicographically smallest among those;
/// nullopt when dst is unreachable.
std::optional<std::vector<int>> route(const LinkGraph& g, int src, int dst);

enum class MessageKind { kCoords, kMap };

struct Message {
  int src = 0;
  int dst = 0;
  MessageKind kind = MessageKind::kCoords;
  std::variant<PositionEstimate, OccupancyGrid> payload;
  double sent_at = 0.0;
};

/// Arrival time, or nullopt when the message is dropped or unroutable.
std::optional<double> deliver(const CommModel& model, const LinkGraph& g, const Message& msg,
                              RandomStream& rng);

/// Messages in flight, released in (arrival time, send order) order.
class MessageQueue {
 public:
  void push(double arrival, Message msg);
  /// Removes and returns every message arriving at or before t.
  std::vector<Message> release(double t);
  std::size_t size() const { return heap_.size(); }

 private:
  struct Entry {
    double arrival;
    std::uint64_t seq;
    Message msg;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.arrival != b.arrival) return a.arrival > b.arrival;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace team
