#include "ubkde/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ubkde/error.hpp"
#include "ubkde/parallel.hpp"

namespace ubkde {

namespace {

void check_inputs(const PointSet& sample, const Kernel& kernel, double h,
                  const PointSet& points) {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::domain, "bandwidth must lie in (0, 1)");
  if (sample.empty()) throw Error(ErrorKind::domain, "empty sample");
  if (sample.dim() != kernel.dim() || (!points.empty() && points.dim() != kernel.dim())) {
    throw Error(ErrorKind::dimension, "kde: dimension mismatch");
  }
}

double side_of(double h, std::size_t d) {
  return d == 1 ? h : std::pow(h, 1.0 / static_cast<double>(d));
}

}  // namespace

std::vector<double> kde_brute(const PointSet& sample, const Kernel& kernel, double h,
                              const PointSet& points) {
  check_inputs(sample, kernel, h, points);
  const std::size_t d = sample.dim();
  const std::size_t n = sample.size();
  const double s = side_of(h, d);
  const double norm = 1.0 / (static_cast<double>(n) * h);
  std::vector<double> out(points.size());
  std::vector<double> u(d);
  for (std::size_t j = 0; j < points.size(); ++j) {
    const Point t = points[j];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point x = sample[i];
      for (std::size_t c = 0; c < d; ++c) u[c] = (x[c] - t[c]) / s;
      sum += kernel.eval_unchecked(u.data());
    }
    out[j] = sum * norm;
  }
  return out;
}

KdeEvaluator::KdeEvaluator(const PointSet& sample, const Kernel& kernel)
    : sample_(&sample), kernel_(kernel), n_(sample.size()), dim_(sample.dim()) {
  if (sample.empty()) throw Error(ErrorKind::domain, "empty sample");
  if (sample.dim() != kernel.dim()) throw Error(ErrorKind::dimension, "kde: dimension mismatch");
  if (dim_ == 1) {
    sorted_ = sample.coords();
    std::sort(sorted_.begin(), sorted_.end());
  }
}

// Points whose scaled offset is far from the support edge are classified by
// position alone; those in a thin band around the edge use the exact
// predicate of the reference implementation.
double KdeEvaluator::at_1d(double t, double h) const {
  const double s = h;
  const double half = 0.5 * s;
  const double margin = 1e-9 * s + 8.0 * std::numeric_limits<double>::epsilon() *
                                        (std::abs(t) + s);
  const auto lo_out = std::lower_bound(sorted_.begin(), sorted_.end(), t - half - margin);
  const auto hi_out = std::upper_bound(lo_out, sorted_.end(), t + half + margin);
  double sum = 0.0;
  if (kernel_.piecewise_constant()) {
    const auto lo_in = std::lower_bound(lo_out, hi_out, t - half + margin);
    const auto hi_in = std::upper_bound(lo_in, hi_out, t + half - margin);
    const double zero = 0.0;
    const double inner_value = kernel_.eval_unchecked(&zero);
    double band = 0.0;
    for (auto it = lo_out; it != lo_in; ++it) {
      const double u = (*it - t) / s;
      band += kernel_.eval_unchecked(&u);
    }
    for (auto it = hi_in; it != hi_out; ++it) {
      const double u = (*it - t) / s;
      band += kernel_.eval_unchecked(&u);
    }
    sum = static_cast<double>(hi_in - lo_in) * inner_value + band;
  } else {
    for (auto it = lo_out; it != hi_out; ++it) {
      const double u = (*it - t) / s;
      sum += kernel_.eval_unchecked(&u);
    }
  }
  return sum * (1.0 / (static_cast<double>(n_) * h));
}

void KdeEvaluator::rebin(double side) const {
  bins_.clear();
  bin_side_ = side;
  std::vector<long long> key(dim_);
  for (std::size_t i = 0; i < n_; ++i) {
    const Point x = (*sample_)[i];
    for (std::size_t c = 0; c < dim_; ++c) {
      key[c] = static_cast<long long>(std::floor(x[c] / side));
    }
    bins_[key].push_back(i);
  }
}

double KdeEvaluator::at_binned(Point t, double h) const {
  const double s = side_of(h, dim_);
  const double margin = 1e-9 * s;
  std::vector<long long> lo(dim_), hi(dim_), key(dim_);
  for (std::size_t c = 0; c < dim_; ++c) {
    lo[c] = static_cast<long long>(std::floor((t[c] - 0.5 * s - margin) / bin_side_));
    hi[c] = static_cast<long long>(std::floor((t[c] + 0.5 * s + margin) / bin_side_));
  }
  std::vector<double> u(dim_);
  double sum = 0.0;
  key = lo;
  while (true) {
    const auto it = bins_.find(key);
    if (it != bins_.end()) {
      for (std::size_t i : it->second) {
        const Point x = (*sample_)[i];
        for (std::size_t c = 0; c < dim_; ++c) u[c] = (x[c] - t[c]) / s;
        sum += kernel_.eval_unchecked(u.data());
      }
    }
    std::size_t c = 0;
    while (c < dim_ && ++key[c] > hi[c]) {
      key[c] = lo[c];
      ++c;
    }
    if (c == dim_) break;
  }
  return sum * (1.0 / (static_cast<double>(n_) * h));
}

void KdeEvaluator::prepare(double max_h) const {
  if (dim_ == 1) return;
  const double s = side_of(max_h, dim_);
  if (bin_side_ < s) rebin(s);
}

double KdeEvaluator::at(Point t, double h) const {
  if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::domain, "bandwidth must lie in (0, 1)");
  if (t.size() != dim_) throw Error(ErrorKind::dimension, "kde: dimension mismatch");
  if (dim_ == 1) return at_1d(t[0], h);
  const double s = side_of(h, dim_);
  if (bin_side_ < s) rebin(s);
  return at_binned(t, h);
}

std::vector<double> KdeEvaluator::operator()(double h, const PointSet& points,
                                             int threads) const {
  check_inputs(*sample_, kernel_, h, points);
  if (n_ * points.size() <= kBruteForceThreshold) {
    return kde_brute(*sample_, kernel_, h, points);
  }
  std::vector<double> out(points.size());
  if (dim_ == 1) {
    parallel_for(points.size(), [&](std::size_t j) { out[j] = at_1d(points[j][0], h); }, threads);
    return out;
  }
  const double s = side_of(h, dim_);
  if (bin_side_ < s || bin_side_ > 4.0 * s) rebin(s);
  parallel_for(points.size(), [&](std::size_t j) { out[j] = at_binned(points[j], h); }, threads);
  return out;
}

double KdeEvaluator::kth_neighbor_distance(Point t, std::size_t k) const {
  if (t.size() != dim_) throw Error(ErrorKind::dimension, "knn: dimension mismatch");
  k = std::clamp<std::size_t>(k, 1, n_);
  if (dim_ == 1) {
    const double x = t[0];
    auto right = std::lower_bound(sorted_.begin(), sorted_.end(), x);
    auto left = right;
    double dist = 0.0;
    for (std::size_t taken = 0; taken < k; ++taken) {
      const bool can_left = left != sorted_.begin();
      const bool can_right = right != sorted_.end();
      const double dl = can_left ? x - *(left - 1) : std::numeric_limits<double>::infinity();
      const double dr = can_right ? *right - x : std::numeric_limits<double>::infinity();
      if (dl <= dr) {
        dist = dl;
        --left;
      } else {
        dist = dr;
        ++right;
      }
    }
    return dist;
  }
  std::vector<double> dist(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double m = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) m = std::max(m, std::abs((*sample_)[i][c] - t[c]));
    dist[i] = m;
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  return dist[k - 1];
}

std::vector<double> kde_fast(const PointSet& sample, const Kernel& kernel, double h,
                             const PointSet& points, int threads) {
  check_inputs(sample, kernel, h, points);
  if (sample.size() * points.size() <= kBruteForceThreshold) {
    return kde_brute(sample, kernel, h, points);
  }
  return KdeEvaluator(sample, kernel)(h, points, threads);
}

std::vector<VariableKdeValue> kde_variable(const PointSet& sample, const Kernel& kernel,
                                           const BandwidthSelector& selector,
                                           const BandwidthWindow& window,
                                           const PointSet& points, int threads) {
  if (points.empty()) throw Error(ErrorKind::domain, "no evaluation points");
  if (sample.empty()) throw Error(ErrorKind::domain, "empty sample");
  std::vector<VariableKdeValue> out(points.size());
  if (!selector.local()) {
    const double h = select_bandwidth(selector, sample, std::nullopt, window);
    const std::vector<double> v = kde_fast(sample, kernel, h, points, threads);
    for (std::size_t j = 0; j < v.size(); ++j) out[j] = {v[j], h};
    return out;
  }
  const KdeEvaluator eval(sample, kernel);
  const double nt = static_cast<double>(sample.size());
  const double an = window.a(nt);
  const double bn = window.b(nt);
  eval.prepare(bn);
  std::size_t k = selector.knn_rank;
  if (k == 0) k = static_cast<std::size_t>(std::ceil(std::sqrt(nt)));
  const double d = static_cast<double>(sample.dim());
  parallel_for(points.size(), [&](std::size_t j) {
    const double dist = eval.kth_neighbor_distance(points[j], k);
    const double h = std::clamp(std::pow(dist, d), an, bn);
    out[j] = {eval.at(points[j], h), h};
  }, threads);
  return out;
}

double kde_grid_mass(const PointSet& sample, const Kernel& kernel, double h,
                     const Box& box, std::size_t cells_per_axis) {
  const std::size_t d = sample.dim();
  if (box.dim() != d) throw Error(ErrorKind::dimension, "grid box dimension mismatch");
  if (cells_per_axis == 0) throw Error(ErrorKind::domain, "grid needs cells");
  PointSet mids(d);
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  double cell_volume = 1.0;
  for (std::size_t c = 0; c < d; ++c) {
    cell_volume *= (box.hi[c] - box.lo[c]) / static_cast<double>(cells_per_axis);
  }
  while (true) {
    for (std::size_t c = 0; c < d; ++c) {
      p[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * (static_cast<double>(idx[c]) + 0.5) /
                             static_cast<double>(cells_per_axis);
    }
    mids.push_back(p);
    std::size_t c = 0;
    while (c < d && ++idx[c] == cells_per_axis) idx[c++] = 0;
    if (c == d) break;
  }
  const std::vector<double> v = kde_fast(sample, kernel, h, mids);
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum * cell_volume;
}

}  // namespace ubkde
