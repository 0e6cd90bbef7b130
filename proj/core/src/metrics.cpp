#include "projscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "projscope/error.hpp"

namespace projscope {

double stress(const DistanceMatrix& d_high, const DistanceMatrix& d_low) {
  if (d_high.size() != d_low.size()) throw ArgumentError("stress: distance matrices differ in size");
  const std::size_t n = d_high.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* h = d_high.row(i);
    const double* l = d_low.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = h[j] - l[j];
      num += diff * diff;
      den += h[j] * h[j];
    }
  }
  if (den == 0.0) throw ArgumentError("stress: high-dimensional distances are all zero");
  return std::sqrt(num / den);
}

std::vector<std::vector<int>> nearest_neighbors(const DistanceMatrix& d, int k) {
  const auto n = static_cast<int>(d.size());
  if (k < 1 || k > n - 1)
    throw ArgumentError("neighbourhood size k=" + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  std::vector<int> idx(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n; ++i) {
    const double* r = d.row(static_cast<std::size_t>(i));
    std::size_t w = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) idx[w++] = j;
    auto closer = [r](int a, int b) { return r[a] < r[b] || (r[a] == r[b] && a < b); };
    std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), closer);
    std::sort(idx.begin(), idx.begin() + k, closer);
    out[static_cast<std::size_t>(i)].assign(idx.begin(), idx.begin() + k);
  }
  return out;
}

double neighborhood_preservation(const std::vector<std::vector<int>>& knn_high, const DistanceMatrix& d_low,
                                 int k) {
  if (knn_high.size() != d_low.size()) throw ArgumentError("neighborhood_preservation: size mismatch");
  const auto knn_low = nearest_neighbors(d_low, k);
  const std::size_t n = d_low.size();
  std::vector<char> mark(n, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (knn_high[i].size() != static_cast<std::size_t>(k))
      throw ArgumentError("neighborhood_preservation: precomputed lists use a different k");
    for (int j : knn_high[i]) mark[static_cast<std::size_t>(j)] = 1;
    int shared = 0;
    for (int j : knn_low[i]) shared += mark[static_cast<std::size_t>(j)];
    for (int j : knn_high[i]) mark[static_cast<std::size_t>(j)] = 0;
    total += static_cast<double>(shared) / k;
  }
  return total / static_cast<double>(n);
}

double neighborhood_preservation(const DistanceMatrix& d_high, const DistanceMatrix& d_low, int k) {
  if (d_high.size() != d_low.size()) throw ArgumentError("neighborhood_preservation: size mismatch");
  return neighborhood_preservation(nearest_neighbors(d_high, k), d_low, k);
}

SilhouetteReport silhouette(const DistanceMatrix& d, std::span<const int> labels) {
  const std::size_t n = d.size();
  if (labels.size() != n) throw ArgumentError("silhouette: label count does not match point count");

  std::vector<int> ids(labels.begin(), labels.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.size() < 2) throw ArgumentError("silhouette: needs at least 2 clusters");

  std::vector<std::size_t> cluster(n);
  std::vector<double> size(ids.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), labels[i]) - ids.begin());
    size[cluster[i]] += 1.0;
  }

  SilhouetteReport rep;
  rep.s.assign(n, 0.0);
  rep.a.assign(n, 0.0);
  rep.b.assign(n, 0.0);
  std::vector<double> sums(ids.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    const double* r = d.row(i);
    for (std::size_t j = 0; j < n; ++j) sums[cluster[j]] += r[j];
    const std::size_t own = cluster[i];
    if (size[own] <= 1.0) continue;  // singleton: s = 0
    const double a = sums[own] / (size[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < ids.size(); ++c)
      if (c != own) b = std::min(b, sums[c] / size[c]);
    const double denom = std::max(a, b);
    rep.a[i] = a;
    rep.b[i] = b;
    rep.s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  rep.overall = std::accumulate(rep.s.begin(), rep.s.end(), 0.0) / static_cast<double>(n);
  return rep;
}

SilhouetteReport silhouette(const Eigen::MatrixXd& coords, std::span<const int> labels) {
  return silhouette(pairwise_distances(coords), labels);
}

double composite(const MetricVector& m, const WeightVector& w) noexcept {
  return w.w1 + w.w2 * m.sc + w.w3 * m.stress + w.w4 * m.np;
}

MetricVector evaluate_projection(const DistanceMatrix& d_high, const Eigen::MatrixXd& coords,
                                 std::span<const int> labels, int k) {
  const DistanceMatrix d_low = pairwise_distances(coords);
  MetricVector m;
  m.sc = silhouette(d_low, labels).overall;
  m.stress = stress(d_high, d_low);
  m.np = neighborhood_preservation(d_high, d_low, k);
  m.np_k = k;
  return m;
}

}  // namespace projscope
