#ifndef BBPN_ORDINATE_HPP
#define BBPN_ORDINATE_HPP

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace bbpn {

/// A point of the index set T = T_1 x ... x T_p: one coordinate block per
/// factor. Continuous factors are real vectors; discrete factors (e.g. an
/// eigenvalue index) are embedded as integer-valued 1-d blocks and passed
/// through the same radial profiles as continuous ones.
class Ordinate {
 public:
  Ordinate() = default;

  /// Single 1-d block (p = 1).
  explicit Ordinate(double coordinate);

  explicit Ordinate(std::vector<Eigen::VectorXd> blocks);

  /// Discrete factor embedded as a real coordinate.
  static Ordinate index(long value) { return Ordinate(static_cast<double>(value)); }

  std::size_t block_count() const { return blocks_.size(); }
  const Eigen::VectorXd& block(std::size_t i) const { return blocks_[i]; }

  /// All coordinates concatenated, in block order. Defines the sort order of
  /// ordinates within one resolution and the CSV column layout t_1..t_p.
  std::vector<double> flattened() const;

  /// True when the block shapes (count and per-block dimension) agree.
  bool same_shape(const Ordinate& other) const;

  friend bool operator==(const Ordinate& a, const Ordinate& b);
  friend bool operator!=(const Ordinate& a, const Ordinate& b) { return !(a == b); }

  /// Lexicographic comparison over flattened coordinates.
  friend bool operator<(const Ordinate& a, const Ordinate& b);

 private:
  std::vector<Eigen::VectorXd> blocks_;
};

/// Euclidean distance between the i'th blocks of two ordinates.
double block_distance(const Ordinate& a, const Ordinate& b, std::size_t i);

}  // namespace bbpn

#endif  // BBPN_ORDINATE_HPP
