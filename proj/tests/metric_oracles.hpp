#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pfuse/common/rng.hpp"
#include "pfuse/data/datagen.hpp"

namespace pfuse::testing {

using data::ImpressionLog;

// Independent O(n²) references.

inline double pairwise_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return pairs == 0.0 ? -1.0 : wins / pairs;
}

inline double brute_gauc(const std::vector<double>& scores, const std::vector<ImpressionLog>& window,
                  std::size_t objective) {
  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<std::uint8_t>>> users;
  for (std::size_t r = 0; r < window.size(); ++r) {
    users[window[r].user_id].first.push_back(scores[r]);
    users[window[r].user_id].second.push_back(window[r].labels[objective]);
  }
  double num = 0.0;
  double den = 0.0;
  for (const auto& [id, data] : users) {
    const double a = pairwise_auc(data.first, data.second);
    if (a < 0.0) continue;
    const double w = static_cast<double>(data.first.size());
    num += w * a;
    den += w;
  }
  return num / den;
}

inline double brute_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0.0;
  double discordant = 0.0;
  double tied_x = 0.0;
  double tied_y = 0.0;
  double n0 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      n0 += 1.0;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) tied_x += 1.0;
      if (dy == 0.0) tied_y += 1.0;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  return (concordant - discordant) / std::sqrt((n0 - tied_x) * (n0 - tied_y));
}

inline std::vector<ImpressionLog> random_window(Rng& rng, std::size_t rows, std::size_t users,
                                         double positive_rate) {
  std::vector<ImpressionLog> w(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    w[r].user_id = static_cast<std::int64_t>(1 + rng.index(users));
    w[r].labels = {static_cast<std::uint8_t>(rng.bernoulli(positive_rate) ? 1 : 0)};
    w[r].ordinal = static_cast<std::int64_t>(r);
  }
  return w;
}

inline std::vector<double> random_scores(Rng& rng, std::size_t n, bool coarse) {
  std::vector<double> s(n);
  for (auto& v : s) v = coarse ? static_cast<double>(rng.index(20)) / 20.0 : rng.uniform();
  return s;
}

}  // namespace pfuse::testing
