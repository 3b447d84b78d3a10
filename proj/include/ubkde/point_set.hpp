#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ubkde {

using Point = std::span<const double>;

/// Flat row-major storage for a list of points in R^d.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept {
    return dim_ == 0 ? 0 : coords_.size() / dim_;
  }
  bool empty() const noexcept { return coords_.empty(); }

  Point operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) {
    return {coords_.data() + i * dim_, dim_};
  }

  void push_back(Point p);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  /// First n points, in order.
  PointSet prefix(std::size_t n) const;

  const std::vector<double>& coords() const noexcept { return coords_; }
  std::vector<double>& coords() noexcept { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

/// Axis-aligned closed box.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const noexcept { return lo.size(); }
  bool contains(Point p) const;
  double volume() const;
  /// Box with the same center and every side scaled by `factor`.
  Box scaled(double factor) const;
  /// Smallest box containing both.
  Box hull(const Box& other) const;
};

Box cube(std::size_t dim, double lo, double hi);

}  // namespace ubkde
