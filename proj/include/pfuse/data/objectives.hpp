#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pfuse::data {

/// A (prerequisite, dependent) pair: dependent = 1 implies prerequisite = 1.
struct FunnelEdge {
  std::string prerequisite;
  std::string dependent;
  friend bool operator==(const FunnelEdge&, const FunnelEdge&) = default;
};

/// Ordered objective names plus the label funnel. The order defines the
/// indexing of every label, prediction and weight vector in an experiment.
class ObjectiveSet {
 public:
  ObjectiveSet(std::vector<std::string> names, std::vector<FunnelEdge> edges);

  /// wtr, ltr, lvtr, ctr, evtr, inlvtr, inevtr with ctr gating the in-room
  /// labels, inevtr gating inlvtr and evtr gating lvtr.
  static ObjectiveSet defaults();

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<FunnelEdge>& edges() const noexcept { return edges_; }
  /// Throws ConfigError for an unknown name.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  /// Indices of the direct prerequisites of objective i.
  const std::vector<std::size_t>& prerequisites(std::size_t i) const { return prereqs_.at(i); }
  /// Objective indices ordered so prerequisites come first; ties keep set order.
  const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

  friend bool operator==(const ObjectiveSet& a, const ObjectiveSet& b) {
    return a.names_ == b.names_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<FunnelEdge> edges_;
  std::vector<std::vector<std::size_t>> prereqs_;
  std::vector<std::size_t> topo_;
};

}  // namespace pfuse::data
