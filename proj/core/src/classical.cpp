#include "bbpn/classical.hpp"

#include <algorithm>
#include <cmath>

#include "bbpn/errors.hpp"

namespace bbpn {

ScalarSequence ScalarSequence::build(std::vector<std::pair<double, double>> points,
                                     double alpha) {
  if (!(alpha > 0.0)) throw ArgumentError("scalar sequence: alpha must be positive");
  for (const auto& [h, v] : points) {
    (void)v;
    if (!(h > 0.0)) throw ArgumentError("scalar sequence: resolutions must be positive");
  }
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first == points[i - 1].first)
      throw ArgumentError("scalar sequence: duplicate resolution");
  }
  return ScalarSequence{std::move(points), alpha};
}

double richardson_pair(double q_h, double q_gh, double h, double gamma, double alpha) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("richardson: gamma must lie in (0,1)");
  if (!(h > 0.0)) throw ArgumentError("richardson: h must be positive");
  if (!(alpha > 0.0)) throw ArgumentError("richardson: alpha must be positive");
  return q_h - (q_gh - q_h) / (std::pow(gamma, alpha) - 1.0);
}

double neville_extrapolate(const ScalarSequence& seq) {
  const std::size_t n = seq.points.size();
  if (n < 2) throw ArgumentError("neville: at least two points required");

  std::vector<double> x(n), tableau(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::pow(seq.points[i].first, seq.alpha);
    tableau[i] = seq.points[i].second;
  }
  // Columns of the tableau, evaluated at x = 0.
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t i = n - 1; i >= k; --i) {
      tableau[i] = (x[i] * tableau[i - 1] - x[i - k] * tableau[i]) / (x[i] - x[i - k]);
    }
  }
  return tableau[n - 1];
}

double bulirsch_stoer_extrapolate(const ScalarSequence& seq) {
  const std::size_t n = seq.points.size();
  if (n < 2) throw ArgumentError("bulirsch-stoer: at least two points required");

  std::vector<double> x(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::pow(seq.points[i].first, seq.alpha);
    scale = std::max(scale, std::abs(seq.points[i].second));
  }
  const double tiny = 1e-14 * std::max(scale, 1.0);

  // Diagonal rational recurrence at x = 0:
  //   T[i][k] = T[i][k-1] + (T[i][k-1] - T[i-1][k-1]) /
  //             ( (x[i-k]/x[i]) (1 - c) - 1 ),  c = dT / (T[i][k-1] - T[i-1][k-2])
  std::vector<std::vector<double>> t(n);
  t[0] = {seq.points[0].second};
  for (std::size_t i = 1; i < n; ++i) {
    t[i].assign(i + 1, 0.0);
    t[i][0] = seq.points[i].second;
    for (std::size_t k = 1; k <= i; ++k) {
      const double prev_low = t[i - 1][k - 1];
      const double cur = t[i][k - 1];
      const double diff = cur - prev_low;
      if (k == 1) {
        const double denom = (x[i - 1] / x[i]) - 1.0;
        if (std::abs(denom) < 1e-14) throw BreakdownError("rational breakdown", i, k);
        t[i][k] = cur + diff / denom;
        continue;
      }
      const double lower = cur - t[i - 1][k - 2];
      if (std::abs(lower) < tiny) {
        // Degenerate column: the two parents coincide; the entry passes through.
        if (std::abs(diff) < tiny) {
          t[i][k] = cur;
          continue;
        }
        throw BreakdownError("rational breakdown", i, k);
      }
      const double denom = (x[i - k] / x[i]) * (1.0 - diff / lower) - 1.0;
      if (std::abs(denom) < 1e-14) throw BreakdownError("rational breakdown", i, k);
      t[i][k] = cur + diff / denom;
    }
  }
  return t[n - 1][n - 1];
}

}  // namespace bbpn
