#include <algorithm>
#include <cmath>

#include "projscope/error.hpp"
#include "projscope/metrics.hpp"
#include "projscope/projectors.hpp"
#include "projscope/rng.hpp"

namespace projscope {
namespace {

constexpr int kSigmaSearchSteps = 64;
constexpr double kSigmaTolerance = 1e-5;
constexpr double kMinSigmaScale = 1e-3;
constexpr double kGradientClip = 4.0;

double clip(double v) { return std::clamp(v, -kGradientClip, kGradientClip); }

}  // namespace

int neighbors_from_fraction(double fraction, Eigen::Index n) {
  const auto k = static_cast<long>(std::lround(fraction * static_cast<double>(n)));
  return static_cast<int>(std::clamp<long>(k, 2, static_cast<long>(n) - 1));
}

FuzzyGraph fuzzy_simplicial_set(const DistanceMatrix& d, int n_neighbors) {
  const std::size_t n = d.size();
  if (n_neighbors < 2 || n_neighbors > static_cast<int>(n) - 1) {
    throw ArgumentError("UMAP n_neighbors=" + std::to_string(n_neighbors) + " outside [2, " +
                        std::to_string(n - 1) + "]");
  }
  const auto knn = nearest_neighbors(d, n_neighbors);
  const double target = std::log2(static_cast<double>(n_neighbors));

  FuzzyGraph g;
  g.rho.assign(n, 0.0);
  g.sigma.assign(n, 1.0);
  std::vector<double> directed(n * n, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double* r = d.row(i);
    const auto& nb = knn[i];
    const double rho = r[nb.front()];
    double mean_dist = 0.0;
    for (int j : nb) mean_dist += r[j];
    mean_dist /= static_cast<double>(nb.size());

    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double sigma = 1.0;
    for (int step = 0; step < kSigmaSearchSteps; ++step) {
      double sum = 0.0;
      for (int j : nb) sum += std::exp(-std::max(0.0, r[j] - rho) / sigma);
      if (std::abs(sum - target) < kSigmaTolerance) break;
      if (sum > target) {
        hi = sigma;
        sigma = 0.5 * (lo + hi);
      } else {
        lo = sigma;
        sigma = std::isinf(hi) ? sigma * 2.0 : 0.5 * (lo + hi);
      }
    }
    sigma = std::max(sigma, kMinSigmaScale * mean_dist);
    if (!(sigma > 0.0)) sigma = kMinSigmaScale;
    g.rho[i] = rho;
    g.sigma[i] = sigma;
    for (int j : nb) directed[i * n + static_cast<std::size_t>(j)] = std::exp(-std::max(0.0, r[j] - rho) / sigma);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = directed[i * n + j];
      const double b = directed[j * n + i];
      const double w = a + b - a * b;
      if (w <= 0.0) continue;
      g.head.push_back(static_cast<int>(i));
      g.tail.push_back(static_cast<int>(j));
      g.weight.push_back(w);
      g.head.push_back(static_cast<int>(j));
      g.tail.push_back(static_cast<int>(i));
      g.weight.push_back(w);
    }
  }
  return g;
}

Eigen::MatrixXd pca_init(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.rows();
  const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 2);
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = cov.rows();
  for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, d); ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.col(c) = centered * v;
    const double sd = std::sqrt(out.col(c).squaredNorm() / static_cast<double>(n));
    if (sd > 0.0) out.col(c) /= sd;
  }
  return out;
}

Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& features, const DistanceMatrix& d, const UmapOptions& opts,
                           std::uint64_t seed) {
  const FuzzyGraph g = fuzzy_simplicial_set(d, opts.n_neighbors);
  const auto n = static_cast<std::size_t>(features.rows());
  Rng rng(seed);

  Eigen::MatrixXd init = pca_init(features);
  for (Eigen::Index c = 0; c < 2; ++c) {
    if (init.col(c).squaredNorm() > 0.0) continue;
    for (Eigen::Index i = 0; i < init.rows(); ++i) init(i, c) = rng.normal();
  }
  std::vector<double> y(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    y[2 * i] = init(static_cast<Eigen::Index>(i), 0);
    y[2 * i + 1] = init(static_cast<Eigen::Index>(i), 1);
  }

  const std::size_t edges = g.weight.size();
  const double max_w = edges ? *std::max_element(g.weight.begin(), g.weight.end()) : 1.0;
  const double epochs = static_cast<double>(opts.epochs);
  // Edges whose expected sample count over all epochs is below one are never visited.
  std::vector<double> per_sample(edges, -1.0);
  for (std::size_t e = 0; e < edges; ++e)
    if (epochs * g.weight[e] / max_w >= 1.0) per_sample[e] = max_w / g.weight[e];
  std::vector<double> next_sample = per_sample;
  std::vector<double> per_negative(edges);
  for (std::size_t e = 0; e < edges; ++e) per_negative[e] = per_sample[e] / opts.negative_sample_rate;
  std::vector<double> next_negative = per_negative;

  const double a = opts.a;
  const double b = opts.b;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const double alpha = opts.initial_alpha * (1.0 - static_cast<double>(epoch) / epochs);
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < edges; ++e) {
      if (per_sample[e] < 0.0 || next_sample[e] > now) continue;
      const auto j = static_cast<std::size_t>(g.head[e]);
      const auto k = static_cast<std::size_t>(g.tail[e]);
      double* cur = &y[2 * j];
      double* oth = &y[2 * k];

      double dx = cur[0] - oth[0];
      double dy = cur[1] - oth[1];
      double dist_sq = dx * dx + dy * dy;
      if (dist_sq > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(dist_sq, b - 1.0) / (a * std::pow(dist_sq, b) + 1.0);
        const double gx = clip(coeff * dx) * alpha;
        const double gy = clip(coeff * dy) * alpha;
        cur[0] += gx;
        cur[1] += gy;
        oth[0] -= gx;
        oth[1] -= gy;
      }
      next_sample[e] += per_sample[e];

      const auto negatives = static_cast<int>((now - next_negative[e]) / per_negative[e]);
      for (int s = 0; s < negatives; ++s) {
        const auto r = static_cast<std::size_t>(rng.below(n));
        if (r == j) continue;
        const double* far = &y[2 * r];
        dx = cur[0] - far[0];
        dy = cur[1] - far[1];
        dist_sq = dx * dx + dy * dy;
        if (dist_sq > 0.0) {
          const double coeff = 2.0 * b / ((0.001 + dist_sq) * (a * std::pow(dist_sq, b) + 1.0));
          cur[0] += clip(coeff * dx) * alpha;
          cur[1] += clip(coeff * dy) * alpha;
        } else {
          cur[0] += kGradientClip * alpha;
          cur[1] += kGradientClip * alpha;
        }
      }
      next_negative[e] += negatives * per_negative[e];
    }
  }

  Eigen::MatrixXd coords(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    coords(static_cast<Eigen::Index>(i), 0) = y[2 * i];
    coords(static_cast<Eigen::Index>(i), 1) = y[2 * i + 1];
  }
  return coords;
}

Eigen::MatrixXd umap_embed(const Eigen::MatrixXd& features, const UmapOptions& opts, std::uint64_t seed) {
  return umap_embed(features, pairwise_distances(features), opts, seed);
}

Projection umap(const Dataset& dataset, int n_neighbors, std::uint64_t seed, int epochs) {
  const DistanceMatrix d = pairwise_distances(dataset.features);
  UmapOptions opts;
  opts.n_neighbors = n_neighbors;
  opts.epochs = epochs;

  Projection p;
  p.id = dataset.id + "-umap-k" + std::to_string(n_neighbors);
  p.dataset_id = dataset.id;
  p.technique = Technique::umap;
  p.params.n_neighbors = n_neighbors;
  p.params.iterations = epochs;
  p.params.learning_rate = opts.initial_alpha;
  p.seed = seed;
  p.coords = umap_embed(dataset.features, d, opts, seed);
  match_distance_energy(p.coords, d);
  return p;
}

}  // namespace projscope
