#include <algorithm>
#include <cmath>
#include <sstream>

#include "projscope/error.hpp"
#include "projscope/projectors.hpp"
#include "projscope/rng.hpp"

namespace projscope {

Eigen::MatrixXd classical_mds(const DistanceMatrix& d, int dims) {
  const auto n = static_cast<Eigen::Index>(d.size());
  if (dims < 1 || dims > n) throw ArgumentError("classical_mds: invalid target dimension");
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* r = d.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = r[j] * r[j];
  }
  // B = -1/2 J D^2 J with J = I - 11^T/n.
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const Eigen::RowVectorXd col_mean = b.colwise().mean();
  const double grand = row_mean.mean();
  b.colwise() -= row_mean;
  b.rowwise() -= col_mean;
  b.array() += grand;
  b *= -0.5;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Eigen::MatrixXd out(n, dims);
  for (int c = 0; c < dims; ++c) {
    const Eigen::Index k = n - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.col(c) = v * std::sqrt(std::max(0.0, eig.eigenvalues()(k)));
  }
  return out;
}

LampTransform lamp_point_transform(const Eigen::RowVectorXd& x, const Eigen::MatrixXd& control_x,
                                   const Eigen::MatrixXd& control_y, double bandwidth) {
  const Eigen::Index m = control_x.rows();
  Eigen::VectorXd sq = (control_x.rowwise() - x).rowwise().squaredNorm();
  // The weights only matter up to a common factor; shifting by the minimum
  // keeps the nearest control at weight 1 and avoids underflow.
  const double min_sq = sq.minCoeff();
  Eigen::VectorXd alpha(m);
  const double denom = 2.0 * bandwidth * bandwidth;
  for (Eigen::Index j = 0; j < m; ++j) alpha(j) = std::exp(-(sq(j) - min_sq) / denom);
  const double total = alpha.sum();

  LampTransform t;
  t.x_center = (alpha.transpose() * control_x) / total;
  t.y_center = (alpha.transpose() * control_y) / total;
  const Eigen::MatrixXd xh = control_x.rowwise() - t.x_center;
  const Eigen::MatrixXd yh = control_y.rowwise() - t.y_center;
  const Eigen::MatrixXd cross = xh.transpose() * (alpha.asDiagonal() * yh);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  t.linear = svd.matrixU() * svd.matrixV().transpose();
  return t;
}

std::size_t control_count(double fraction, Eigen::Index n) {
  const auto k = static_cast<long>(std::lround(fraction * static_cast<double>(n)));
  return static_cast<std::size_t>(std::clamp<long>(k, 0, static_cast<long>(n)));
}

LampResult lamp_embed(const Eigen::MatrixXd& features, double control_fraction, std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  if (!(control_fraction > 0.0 && control_fraction <= 1.0)) {
    std::ostringstream os;
    os << "LAMP control fraction " << control_fraction << " outside (0, 1]";
    throw ArgumentError(os.str());
  }
  const std::size_t m = control_count(control_fraction, n);
  if (m < 3) throw ArgumentError("LAMP needs at least 3 control points, got " + std::to_string(m));

  LampResult res;
  Rng rng(seed);
  res.control_indices = rng.sample_without_replacement(static_cast<std::size_t>(n), m);
  std::sort(res.control_indices.begin(), res.control_indices.end());

  Eigen::MatrixXd control_x(static_cast<Eigen::Index>(m), features.cols());
  for (std::size_t c = 0; c < m; ++c)
    control_x.row(static_cast<Eigen::Index>(c)) = features.row(static_cast<Eigen::Index>(res.control_indices[c]));
  const DistanceMatrix d_ctrl = pairwise_distances(control_x);
  res.control_coords = classical_mds(d_ctrl, 2);

  // Bandwidth: mean distance from each control point to its nearest other control.
  double spacing = 0.0;
  int counted = 0;
  for (std::size_t i = 0; i < m; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    const double* r = d_ctrl.row(i);
    for (std::size_t j = 0; j < m; ++j)
      if (j != i && r[j] > 0.0) nearest = std::min(nearest, r[j]);
    if (std::isfinite(nearest)) {
      spacing += nearest;
      ++counted;
    }
  }
  res.bandwidth = counted > 0 ? spacing / counted : 1.0;

  res.coords.resize(n, 2);
  std::vector<char> is_control(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < m; ++c) {
    is_control[res.control_indices[c]] = 1;
    res.coords.row(static_cast<Eigen::Index>(res.control_indices[c])) = res.control_coords.row(static_cast<Eigen::Index>(c));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_control[static_cast<std::size_t>(i)]) continue;
    const Eigen::RowVectorXd x = features.row(i);
    Eigen::Index nearest = 0;
    const double nearest_sq = (control_x.rowwise() - x).rowwise().squaredNorm().minCoeff(&nearest);
    if (nearest_sq == 0.0) {
      res.coords.row(i) = res.control_coords.row(nearest);
      continue;
    }
    const LampTransform t = lamp_point_transform(x, control_x, res.control_coords, res.bandwidth);
    res.coords.row(i) = (x - t.x_center) * t.linear + t.y_center;
  }
  return res;
}

Projection lamp(const Dataset& dataset, double control_fraction, std::uint64_t seed) {
  LampResult r = lamp_embed(dataset.features, control_fraction, seed);
  std::ostringstream id;
  id << dataset.id << "-lamp-f" << control_fraction;
  Projection p;
  p.id = id.str();
  p.dataset_id = dataset.id;
  p.technique = Technique::lamp;
  p.params.control_fraction = control_fraction;
  p.seed = seed;
  p.coords = std::move(r.coords);
  match_distance_energy(p.coords, pairwise_distances(dataset.features));
  return p;
}

}  // namespace projscope
