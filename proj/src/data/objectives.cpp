#include "pfuse/data/objectives.hpp"

#include <algorithm>
#include <set>

#include "pfuse/common/error.hpp"

namespace pfuse::data {

ObjectiveSet::ObjectiveSet(std::vector<std::string> names, std::vector<FunnelEdge> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
  if (names_.empty()) throw ConfigError("objective set is empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ConfigError("objective names must be non-empty");
    if (!seen.insert(n).second) throw ConfigError("duplicate objective '" + n + "'");
  }
  prereqs_.resize(names_.size());
  for (const auto& e : edges_) {
    const std::size_t pre = index_of(e.prerequisite);
    const std::size_t dep = index_of(e.dependent);
    if (pre == dep) throw ConfigError("funnel edge on '" + e.dependent + "' is a self-loop");
    prereqs_[dep].push_back(pre);
  }

  // Kahn's algorithm, always taking the lowest ready index.
  std::vector<std::size_t> indegree(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) indegree[i] = prereqs_[i].size();
  std::vector<bool> done(names_.size(), false);
  while (topo_.size() < names_.size()) {
    std::size_t next = names_.size();
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (!done[i] && indegree[i] == 0) {
        next = i;
        break;
      }
    }
    if (next == names_.size()) throw ConfigError("funnel edges contain a cycle");
    done[next] = true;
    topo_.push_back(next);
    for (std::size_t i = 0; i < names_.size(); ++i) {
      indegree[i] -= static_cast<std::size_t>(
          std::count(prereqs_[i].begin(), prereqs_[i].end(), next));
    }
  }
}

ObjectiveSet ObjectiveSet::defaults() {
  return ObjectiveSet({"wtr", "ltr", "lvtr", "ctr", "evtr", "inlvtr", "inevtr"},
                      {{"ctr", "inevtr"}, {"ctr", "inlvtr"}, {"inevtr", "inlvtr"},
                       {"evtr", "lvtr"}});
}

std::size_t ObjectiveSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ConfigError("unknown objective '" + name + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

bool ObjectiveSet::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

}  // namespace pfuse::data
