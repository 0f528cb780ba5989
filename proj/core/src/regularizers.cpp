#include "pact/regularizers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "pact/error.hpp"

namespace pact {

TermValue dc_loss(const ForwardOperator& op, const ImageSequence& frames, const Sinogram& y) {
  require(frames.n() == op.grid().n, ErrorCode::shape_mismatch,
          "dc_loss: image grid does not match the operator");
  require(y.sensors() == op.sensors() && y.samples() == op.samples(), ErrorCode::shape_mismatch,
          "dc_loss: sinogram does not match the operator geometry");
  require(y.frames() == frames.frames(), ErrorCode::shape_mismatch,
          "dc_loss: sinogram and image sequence have different frame counts");
  require(y.signal() == op.signal(), ErrorCode::shape_mismatch,
          "dc_loss: sinogram signal kind does not match the operator");

  std::vector<double> residual(y.size());
  op.forward(frames.data(), frames.frames(), residual);
  const auto measured = y.data();
  double value = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] -= measured[i];
    value += residual[i] * residual[i];
  }
  TermValue out{value, std::vector<double>(frames.size())};
  op.adjoint(residual, frames.frames(), out.gradient);
  for (double& g : out.gradient) g *= 2.0;
  return out;
}

TermValue temporal_tv(const ImageSequence& frames, double epsilon) {
  require(epsilon > 0.0, ErrorCode::invalid_argument, "temporal_tv: epsilon must be positive");
  const std::size_t pixels = frames.pixels_per_frame();
  const std::size_t count = frames.frames();
  const auto x = frames.data();
  TermValue out{0.0, std::vector<double>(frames.size(), 0.0)};
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t t = 0; t + 1 < count; ++t) {
      const double d = x[(t + 1) * pixels + p] - x[t * pixels + p];
      const double root = std::sqrt(d * d + epsilon * epsilon);
      out.value += root - epsilon;
      const double slope = d / root;
      out.gradient[(t + 1) * pixels + p] += slope;
      out.gradient[t * pixels + p] -= slope;
    }
  }
  return out;
}

namespace {

// Thin SVD through a Householder QR of the tall Casorati matrix: X = Q R and
// R = U S V^T, so X = (Q U) S V^T. Forming X^T X instead would lose half the
// digits of the small singular values.
struct ThinSvd {
  Eigen::MatrixXd q;  // rows x T, orthonormal columns
  Eigen::MatrixXd u;  // T x T
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
};

ThinSvd thin_svd(const ImageSequence& frames) {
  const auto x = frames.casorati();
  require(x.cols() <= x.rows(), ErrorCode::invalid_argument,
          "nuclear_norm needs frames <= pixels per frame");
  const Eigen::Index cols = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  require(svd.info() == Eigen::Success, ErrorCode::numerical, "nuclear_norm: SVD failed");
  return {qr.householderQ() * Eigen::MatrixXd::Identity(x.rows(), cols), svd.matrixU(),
          svd.singularValues(), svd.matrixV()};
}

}  // namespace

TermValue nuclear_norm(const ImageSequence& frames, double relative_floor) {
  const ThinSvd svd = thin_svd(frames);
  TermValue out{svd.sigma.sum(), std::vector<double>(frames.size(), 0.0)};
  const double sigma_max = svd.sigma.size() ? svd.sigma(0) : 0.0;
  if (sigma_max <= 0.0) return out;

  // U V^T over the retained directions.
  Eigen::MatrixXd core = Eigen::MatrixXd::Zero(svd.v.rows(), svd.v.rows());
  for (Eigen::Index k = 0; k < svd.sigma.size(); ++k) {
    if (svd.sigma(k) <= relative_floor * sigma_max) continue;
    core.noalias() += svd.u.col(k) * svd.v.col(k).transpose();
  }
  Eigen::Map<Eigen::MatrixXd> grad(out.gradient.data(), frames.casorati().rows(),
                                   frames.casorati().cols());
  grad.noalias() = svd.q * core;
  return out;
}

std::vector<double> casorati_singular_values(const ImageSequence& frames) {
  const Eigen::VectorXd sigma = thin_svd(frames).sigma;
  return {sigma.data(), sigma.data() + sigma.size()};
}

}  // namespace pact
