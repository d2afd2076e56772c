#include "pfuse/metrics/auc.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "pfuse/common/error.hpp"

namespace pfuse::metrics {

namespace {

/// 1-based ranks with ties sharing their mean rank, for the given rows.
void midranks(std::span<const double> scores, const std::vector<std::size_t>& rows,
              std::vector<std::size_t>& order, std::vector<double>& ranks) {
  const std::size_t n = rows.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[rows[a]] < scores[rows[b]]; });
  ranks.assign(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[rows[order[j]]] == scores[rows[order[i]]]) ++j;
    // Ranks i+1..j share (i+1+j)/2.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
}

std::optional<double> auc_from_ranks(const std::vector<double>& ranks,
                                     const std::vector<std::size_t>& rows,
                                     const std::vector<data::ImpressionLog>& window,
                                     std::size_t objective) {
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (window[rows[r]].labels[objective]) {
      rank_sum += ranks[r];
      ++positives;
    }
  }
  const std::size_t negatives = rows.size() - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  return (rank_sum - 0.5 * p * (p + 1.0)) / (p * static_cast<double>(negatives));
}

void check_window(std::span<const double> scores, const std::vector<data::ImpressionLog>& window) {
  if (scores.size() != window.size()) {
    throw ContractViolation("gauc: " + std::to_string(scores.size()) + " scores for " +
                            std::to_string(window.size()) + " rows");
  }
}

}  // namespace

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ContractViolation("auc: " + std::to_string(scores.size()) + " scores vs " +
                            std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> rows(scores.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<std::size_t> order;
  std::vector<double> ranks;
  midranks(scores, rows, order, ranks);
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      rank_sum += ranks[i];
      ++positives;
    }
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  const double p = static_cast<double>(positives);
  return (rank_sum - 0.5 * p * (p + 1.0)) / (p * static_cast<double>(negatives));
}

UserGroups::UserGroups(const std::vector<data::ImpressionLog>& window) : rows_(window.size()) {
  std::map<std::int64_t, std::vector<std::size_t>> by_user;
  for (std::size_t r = 0; r < window.size(); ++r) by_user[window[r].user_id].push_back(r);
  users_.reserve(by_user.size());
  groups_.reserve(by_user.size());
  for (auto& [user, rows] : by_user) {
    users_.push_back(user);
    groups_.push_back(std::move(rows));
  }
}

GaucValue gauc(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
               std::size_t objective) {
  return gauc(scores, window, UserGroups(window), objective);
}

GaucValue gauc(std::span<const double> scores, const std::vector<data::ImpressionLog>& window,
               const UserGroups& groups, std::size_t objective) {
  check_window(scores, window);
  GaucValue out;
  double weighted = 0.0;
  double exposure = 0.0;
  std::vector<std::size_t> order;
  std::vector<double> ranks;
  for (std::size_t g = 0; g < groups.user_count(); ++g) {
    const auto& rows = groups.rows(g);
    midranks(scores, rows, order, ranks);
    const auto user_auc = auc_from_ranks(ranks, rows, window, objective);
    if (!user_auc) {
      ++out.excluded_users;
      continue;
    }
    ++out.counted_users;
    const double w = static_cast<double>(rows.size());
    weighted += w * *user_auc;
    exposure += w;
  }
  if (out.counted_users == 0) {
    throw UndefinedMetric("gauc: no user in the window has both positive and negative labels");
  }
  out.gauc = weighted / exposure;
  return out;
}

double GaucReport::value(const std::string& objective) const {
  auto it = std::find(objectives.begin(), objectives.end(), objective);
  if (it == objectives.end()) throw ConfigError("report has no objective '" + objective + "'");
  return gauc[static_cast<std::size_t>(it - objectives.begin())];
}

GaucReport gauc_report(std::span<const double> scores,
                       const std::vector<data::ImpressionLog>& window, const UserGroups& groups,
                       const data::ObjectiveSet& objectives, std::string window_id) {
  check_window(scores, window);
  const std::size_t n_obj = objectives.size();
  std::vector<double> weighted(n_obj, 0.0), exposure(n_obj, 0.0);
  GaucReport report;
  report.objectives = objectives.names();
  report.counted_users.assign(n_obj, 0);
  report.excluded_users.assign(n_obj, 0);
  report.window_id = std::move(window_id);
  std::vector<std::size_t> order;
  std::vector<double> ranks;
  // Ranks depend only on the scores, so each user is sorted once.
  for (std::size_t g = 0; g < groups.user_count(); ++g) {
    const auto& rows = groups.rows(g);
    midranks(scores, rows, order, ranks);
    const double w = static_cast<double>(rows.size());
    for (std::size_t o = 0; o < n_obj; ++o) {
      const auto user_auc = auc_from_ranks(ranks, rows, window, o);
      if (!user_auc) {
        ++report.excluded_users[o];
        continue;
      }
      ++report.counted_users[o];
      weighted[o] += w * *user_auc;
      exposure[o] += w;
    }
  }
  report.gauc.resize(n_obj);
  for (std::size_t o = 0; o < n_obj; ++o) {
    if (report.counted_users[o] == 0) {
      throw UndefinedMetric("gauc: no user has both classes for objective '" +
                            objectives.name(o) + "'");
    }
    report.gauc[o] = weighted[o] / exposure[o];
  }
  return report;
}

}  // namespace pfuse::metrics
