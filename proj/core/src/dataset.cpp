#include "bbpn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bbpn/errors.hpp"

namespace bbpn {

namespace {

// Lexicographic dataset order: decreasing h, then ascending ordinate.
bool datum_less(const Datum& a, const Datum& b) {
  if (a.h != b.h) return a.h > b.h;
  return a.t < b.t;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset Dataset::build(std::vector<Datum> points) {
  if (points.empty()) throw ArgumentError("dataset: empty input");
  for (const auto& d : points) {
    if (!(d.h > 0.0)) throw ArgumentError("dataset: resolution h must be positive");
    if (d.t.block_count() == 0) throw ArgumentError("dataset: ordinate must have at least one block");
    if (!points.front().t.same_shape(d.t))
      throw ArgumentError("dataset: inconsistent ordinate block structure");
  }

  std::sort(points.begin(), points.end(), datum_less);

  Dataset out;
  out.data_.reserve(points.size());
  for (auto& d : points) {
    if (!out.data_.empty() && out.data_.back().h == d.h && out.data_.back().t == d.t) {
      if (out.data_.back().value != d.value)
        throw DataConsistencyError("dataset: conflicting values at identical (h, t)");
      continue;  // exact duplicate
    }
    out.data_.push_back(std::move(d));
  }

  for (const auto& d : out.data_) {
    if (out.resolutions_.empty() || out.resolutions_.back() != d.h) {
      out.resolutions_.push_back(d.h);
      out.counts_.push_back(1);
    } else {
      ++out.counts_.back();
    }
  }
  return out;
}

double Dataset::finest_h() const {
  if (resolutions_.empty()) throw ArgumentError("dataset: empty");
  return resolutions_.back();
}

std::size_t Dataset::ordinate_blocks() const {
  return data_.empty() ? 0 : data_.front().t.block_count();
}

Eigen::VectorXd Dataset::values() const {
  Eigen::VectorXd q(static_cast<Eigen::Index>(data_.size()));
  for (std::size_t l = 0; l < data_.size(); ++l) q[static_cast<Eigen::Index>(l)] = data_[l].value;
  return q;
}

std::vector<Ordinate> Dataset::distinct_ordinates() const {
  std::vector<Ordinate> out;
  for (const auto& d : data_) out.push_back(d.t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.data_.size() != b.data_.size()) return false;
  for (std::size_t i = 0; i < a.data_.size(); ++i) {
    if (a.data_[i].h != b.data_[i].h || a.data_[i].value != b.data_[i].value ||
        a.data_[i].t != b.data_[i].t)
      return false;
  }
  return true;
}

std::vector<Dataset> augment_cumulative(const std::vector<Dataset>& runs) {
  std::vector<Dataset> out;
  out.reserve(runs.size());
  std::vector<Datum> pool;
  for (const auto& run : runs) {
    pool.insert(pool.end(), run.begin(), run.end());
    out.push_back(Dataset::build(pool));
  }
  return out;
}

HParameterization HParameterization::power(double exponent) {
  if (exponent == 0.0 || !std::isfinite(exponent))
    throw ArgumentError("h-parameterization: exponent must be finite and non-zero");
  return HParameterization(exponent);
}

HParameterization HParameterization::parse(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }),
          s.end());
  if (s == "w") return power(1.0);
  if (s.rfind("w^", 0) == 0) {
    try {
      std::size_t used = 0;
      const double e = std::stod(s.substr(2), &used);
      if (used == s.size() - 2) return power(e);
    } catch (const std::exception&) {
    }
  }
  throw ArgumentError("h-parameterization: cannot parse '" + std::string(text) +
                      "' (expected w^<exponent>)");
}

double HParameterization::h_from_control(double w) const {
  if (!(w > 0.0)) throw ArgumentError("h-parameterization: control w must be positive");
  const double h = std::pow(w, exponent_);
  if (!(h > 0.0) || !std::isfinite(h))
    throw ArgumentError("h-parameterization: mapped resolution is not positive finite");
  return h;
}

double HParameterization::control_from_h(double h) const {
  if (!(h > 0.0)) throw ArgumentError("h-parameterization: h must be positive");
  return std::pow(h, 1.0 / exponent_);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset csv: missing header row");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header.front() != "h" || header.back() != "value")
    throw IoError("dataset csv: header must be h,t_1..t_p,value");
  const std::size_t p = header.size() - 2;

  std::vector<Datum> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw IoError("dataset csv: wrong field count on line " + std::to_string(lineno));
    Datum d;
    try {
      d.h = std::stod(fields[0]);
      std::vector<Eigen::VectorXd> blocks;
      for (std::size_t i = 0; i < p; ++i) {
        Eigen::VectorXd b(1);
        b[0] = std::stod(fields[1 + i]);
        blocks.push_back(std::move(b));
      }
      d.t = Ordinate(std::move(blocks));
      d.value = std::stod(fields.back());
    } catch (const std::exception&) {
      throw IoError("dataset csv: unparsable number on line " + std::to_string(lineno));
    }
    points.push_back(std::move(d));
  }
  return Dataset::build(std::move(points));
}

Dataset read_dataset_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("dataset csv: cannot open " + path);
  return read_dataset_csv(in);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const std::size_t p = data.empty() ? 1 : data[0].t.flattened().size();
  out << "h";
  for (std::size_t i = 1; i <= p; ++i) out << ",t_" << i;
  out << ",value\n";
  for (const auto& d : data) {
    out << format_double(d.h);
    for (double c : d.t.flattened()) out << ',' << format_double(c);
    out << ',' << format_double(d.value) << '\n';
  }
}

}  // namespace bbpn
