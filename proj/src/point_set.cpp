#include "ubkde/point_set.hpp"

#include <algorithm>

#include "ubkde/error.hpp"

namespace ubkde {

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0 || coords_.size() % dim_ != 0) {
    throw Error(ErrorKind::dimension,
                "coordinate count is not a multiple of the dimension");
  }
}

void PointSet::push_back(Point p) {
  if (p.size() != dim_) {
    throw Error(ErrorKind::dimension, "point dimension mismatch");
  }
  coords_.insert(coords_.end(), p.begin(), p.end());
}

PointSet PointSet::prefix(std::size_t n) const {
  n = std::min(n, size());
  return PointSet(dim_, std::vector<double>(coords_.begin(),
                                            coords_.begin() + n * dim_));
}

bool Box::contains(Point p) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

Box Box::scaled(double factor) const {
  Box out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const double c = 0.5 * (lo[i] + hi[i]);
    const double r = 0.5 * (hi[i] - lo[i]) * factor;
    out.lo[i] = c - r;
    out.hi[i] = c + r;
  }
  return out;
}

Box Box::hull(const Box& other) const {
  Box out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] = std::min(lo[i], other.lo[i]);
    out.hi[i] = std::max(hi[i], other.hi[i]);
  }
  return out;
}

Box cube(std::size_t dim, double lo, double hi) {
  return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

}  // namespace ubkde
