#include "bbpn/ordinate.hpp"

#include "bbpn/errors.hpp"

namespace bbpn {

Ordinate::Ordinate(double coordinate) {
  Eigen::VectorXd b(1);
  b[0] = coordinate;
  blocks_.push_back(std::move(b));
}

Ordinate::Ordinate(std::vector<Eigen::VectorXd> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.size() == 0) throw ArgumentError("ordinate block must be non-empty");
  }
}

std::vector<double> Ordinate::flattened() const {
  std::vector<double> out;
  for (const auto& b : blocks_) {
    out.insert(out.end(), b.data(), b.data() + b.size());
  }
  return out;
}

bool Ordinate::same_shape(const Ordinate& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].size() != other.blocks_[i].size()) return false;
  }
  return true;
}

bool operator==(const Ordinate& a, const Ordinate& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
    if (a.blocks_[i] != b.blocks_[i]) return false;
  }
  return true;
}

bool operator<(const Ordinate& a, const Ordinate& b) {
  const auto fa = a.flattened();
  const auto fb = b.flattened();
  return std::lexicographical_compare(fa.begin(), fa.end(), fb.begin(), fb.end());
}

double block_distance(const Ordinate& a, const Ordinate& b, std::size_t i) {
  if (i >= a.block_count() || i >= b.block_count())
    throw ArgumentError("ordinate block index out of range");
  if (a.block(i).size() != b.block(i).size())
    throw ArgumentError("ordinate block dimensions differ");
  return (a.block(i) - b.block(i)).norm();
}

}  // namespace bbpn
