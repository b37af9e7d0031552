#ifndef BBPN_CLASSICAL_HPP
#define BBPN_CLASSICAL_HPP

#include <utility>
#include <vector>

namespace bbpn {

/// A scalar method output along strictly decreasing resolutions, together
/// with the order alpha used to form the extrapolation abscissa x = h^alpha.
struct ScalarSequence {
  std::vector<std::pair<double, double>> points;  // (h, q(h)), h strictly decreasing
  double alpha = 1.0;

  /// Sorts by decreasing h and validates: h > 0, distinct, alpha > 0.
  static ScalarSequence build(std::vector<std::pair<double, double>> points, double alpha);
};

/// Vertical-axis intercept of the straight line through (h^alpha, q(h)) and
/// ((gamma h)^alpha, q(gamma h)):  q(h) - (q(gamma h) - q(h)) / (gamma^alpha - 1).
double richardson_pair(double q_h, double q_gh, double h, double gamma, double alpha);

/// Value at 0 of the degree (n-1) polynomial through (h_i^alpha, q_i),
/// computed by the Neville tableau.
double neville_extrapolate(const ScalarSequence& seq);

/// Value at 0 of the diagonal rational extrapolation tableau in x = h^alpha.
/// Near-zero recurrence denominators raise BreakdownError naming the cell.
double bulirsch_stoer_extrapolate(const ScalarSequence& seq);

}  // namespace bbpn

#endif  // BBPN_CLASSICAL_HPP
