#include <algorithm>
#include <cmath>
#include <sstream>

#include "projscope/error.hpp"
#include "projscope/projectors.hpp"
#include "projscope/rng.hpp"

namespace projscope {
namespace {

constexpr double kPerplexityTolerance = 1e-5;
constexpr int kMaxBisectionSteps = 50;
constexpr double kMinGain = 0.01;

std::string param_tag(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> conditional_affinities(const DistanceMatrix& d, double perplexity,
                                           std::vector<double>* achieved) {
  const std::size_t n = d.size();
  std::vector<double> p(n * n, 0.0);
  if (achieved) achieved->assign(n, 0.0);
  std::vector<double> shifted(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double* r = d.row(i);
    double min_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) min_sq = std::min(min_sq, r[j] * r[j]);
    for (std::size_t j = 0; j < n; ++j) shifted[j] = j == i ? 0.0 : r[j] * r[j] - min_sq;

    double* row = p.data() + i * n;
    // Bisection on log(beta); entropy decreases monotonically in beta.
    double lo = -50.0;
    double hi = 50.0;
    double achieved_perp = 0.0;
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
      const double log_beta = 0.5 * (lo + hi);
      const double beta = std::exp(log_beta);
      double z = 0.0;
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double w = std::exp(-beta * shifted[j]);
        row[j] = w;
        z += w;
        weighted += w * shifted[j];
      }
      const double entropy = std::log(z) + beta * weighted / z;
      achieved_perp = std::exp(entropy);
      for (std::size_t j = 0; j < n; ++j) row[j] /= z;
      if (std::abs(achieved_perp - perplexity) < kPerplexityTolerance) break;
      if (achieved_perp > perplexity)
        lo = log_beta;
      else
        hi = log_beta;
    }
    if (achieved) (*achieved)[i] = achieved_perp;
  }
  return p;
}

TsneResult tsne_embed(const DistanceMatrix& d, const TsneOptions& opts, std::uint64_t seed) {
  const std::size_t n = d.size();
  const double max_perplexity = (static_cast<double>(n) - 1.0) / 3.0;
  if (!(opts.perplexity >= 1.0) || opts.perplexity > max_perplexity) {
    throw ArgumentError("t-SNE perplexity " + param_tag(opts.perplexity) + " outside [1, " +
                        param_tag(max_perplexity) + "] for n=" + std::to_string(n));
  }
  if (opts.iterations < 0) throw ArgumentError("t-SNE iteration count must be non-negative");

  TsneResult result;
  std::vector<double> p = conditional_affinities(d, opts.perplexity, &result.row_perplexity);
  // Symmetrise in place: P_ij = (p_j|i + p_i|j) / 2n.
  const double norm = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (p[i * n + j] + p[j * n + i]) / norm;
      p[i * n + j] = v;
      p[j * n + i] = v;
    }
  }
  double p_log_p = 0.0;
  if (opts.track_objective) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (p[i * n + j] > 0.0) p_log_p += 2.0 * p[i * n + j] * std::log(p[i * n + j]);
  }

  Rng rng(seed);
  std::vector<double> y(2 * n);
  for (double& v : y) v = opts.init_sigma * rng.normal();
  std::vector<double> velocity(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);
  std::vector<double> attract(2 * n);
  std::vector<double> repulse(2 * n);

  for (int iter = 0; iter < opts.iterations; ++iter) {
    const double exaggeration = iter < opts.exaggeration_iterations ? opts.exaggeration : 1.0;
    const double momentum = iter < opts.momentum_switch_iteration ? opts.initial_momentum : opts.final_momentum;

    std::fill(attract.begin(), attract.end(), 0.0);
    std::fill(repulse.begin(), repulse.end(), 0.0);
    double z = 0.0;
    double p_log_num = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = y[2 * i];
      const double yi = y[2 * i + 1];
      const double* prow = p.data() + i * n;
      double ax = 0.0, ay = 0.0, rx = 0.0, ry = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = xi - y[2 * j];
        const double dy = yi - y[2 * j + 1];
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        const double a = prow[j] * num;
        const double r = num * num;
        z += num;
        ax += a * dx;
        ay += a * dy;
        rx += r * dx;
        ry += r * dy;
        attract[2 * j] -= a * dx;
        attract[2 * j + 1] -= a * dy;
        repulse[2 * j] -= r * dx;
        repulse[2 * j + 1] -= r * dy;
        if (opts.track_objective && prow[j] > 0.0) p_log_num += prow[j] * std::log(num);
      }
      attract[2 * i] += ax;
      attract[2 * i + 1] += ay;
      repulse[2 * i] += rx;
      repulse[2 * i + 1] += ry;
    }
    z *= 2.0;
    if (opts.track_objective) result.kl_history.push_back(p_log_p - 2.0 * p_log_num + std::log(z));

    for (std::size_t k = 0; k < 2 * n; ++k) {
      const double grad = 4.0 * (exaggeration * attract[k] - repulse[k] / z);
      const bool same_sign = (grad > 0.0) == (velocity[k] > 0.0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, kMinGain) : gains[k] + 0.2;
      velocity[k] = momentum * velocity[k] - opts.learning_rate * gains[k] * grad;
      y[k] += velocity[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }

  result.coords.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    result.coords(static_cast<Eigen::Index>(i), 0) = y[2 * i];
    result.coords(static_cast<Eigen::Index>(i), 1) = y[2 * i + 1];
  }
  return result;
}

TsneResult tsne_embed(const Eigen::MatrixXd& features, const TsneOptions& opts, std::uint64_t seed) {
  return tsne_embed(pairwise_distances(features), opts, seed);
}

Projection tsne(const Dataset& dataset, double perplexity, std::uint64_t seed, int iterations) {
  const DistanceMatrix d = pairwise_distances(dataset.features);
  TsneOptions opts;
  opts.perplexity = perplexity;
  opts.iterations = iterations;

  Projection p;
  p.id = dataset.id + "-tsne-p" + param_tag(perplexity);
  p.dataset_id = dataset.id;
  p.technique = Technique::tsne;
  p.params.perplexity = perplexity;
  p.params.iterations = iterations;
  p.params.learning_rate = opts.learning_rate;
  p.seed = seed;
  p.coords = tsne_embed(d, opts, seed).coords;
  match_distance_energy(p.coords, d);
  return p;
}

}  // namespace projscope
