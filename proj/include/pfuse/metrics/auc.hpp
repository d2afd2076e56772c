#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfuse/data/datagen.hpp"

namespace pfuse::metrics {

/// Probability that a random positive outranks a random negative, ties
/// counted 1/2. std::nullopt when either class is absent.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Row indices of an evaluation window grouped by user (ascending user id,
/// rows in window order within a user).
class UserGroups {
 public:
  UserGroups() = default;
  explicit UserGroups(const std::vector<data::ImpressionLog>& window);

  std::size_t user_count() const noexcept { return groups_.size(); }
  std::size_t row_count() const noexcept { return rows_; }
  const std::vector<std::size_t>& rows(std::size_t group) const { return groups_.at(group); }
  std::int64_t user_id(std::size_t group) const { return users_.at(group); }

 private:
  std::vector<std::int64_t> users_;
  std::vector<std::vector<std::size_t>> groups_;
  std::size_t rows_ = 0;
};

struct GaucValue {
  double gauc = 0.0;
  std::size_t counted_users = 0;
  std::size_t excluded_users = 0;
};

/// Exposure-weighted mean of per-user AUC. Users whose labels are single-class
/// are excluded and the weights renormalized over the included users. Throws
/// UndefinedMetric when no user is included.
GaucValue gauc(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
               std::size_t objective);
GaucValue gauc(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
               const UserGroups& groups, std::size_t objective);

/// Per-objective GAUC of one model on one evaluation window.
struct GaucReport {
  std::vector<std::string> objectives;
  std::vector<double> gauc;
  std::vector<std::size_t> counted_users;
  std::vector<std::size_t> excluded_users;
  std::string window_id;

  std::size_t size() const noexcept { return gauc.size(); }
  double value(const std::string& objective) const;
};

/// GAUC of one score vector against every objective's labels.
GaucReport gauc_report(std::span<const double> scores,
                       const std::vector<data::ImpressionLog>& window, const UserGroups& groups,
                       const data::ObjectiveSet& objectives, std::string window_id);

}  // namespace pfuse::metrics
