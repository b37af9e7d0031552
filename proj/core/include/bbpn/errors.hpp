#ifndef BBPN_ERRORS_HPP
#define BBPN_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbpn {

/// Precondition or argument violation.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Conflicting observations at the same (h, t).
class DataConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gram factorization failed, even after nugget escalation.
class ConditioningError : public std::runtime_error {
 public:
  ConditioningError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// All observations are zero; the closed-form amplitude would vanish and the
/// posterior would be singular.
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration state left the finite range.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what + " at step " + std::to_string(step_index)),
        step_index_(step_index) {}

  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

/// Near-zero denominator in an extrapolation recurrence; carries the tableau
/// cell (row, column) where the breakdown occurred.
class BreakdownError : public std::runtime_error {
 public:
  BreakdownError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what + " at tableau cell (" + std::to_string(row) +
                           ", " + std::to_string(column) + ")"),
        row_(row),
        column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// A numerical routine produced non-finite or otherwise unusable output.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bbpn

#endif  // BBPN_ERRORS_HPP
