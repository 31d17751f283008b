#include "hzd/virtual_constraints.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hzd {

namespace {

// Bernstein-form evaluation by de Casteljau on a column-major control net.
Vec4 de_casteljau(Eigen::Matrix<double, 4, Eigen::Dynamic> pts, double s) {
  for (int n = static_cast<int>(pts.cols()) - 1; n > 0; --n) {
    for (int i = 0; i < n; ++i) pts.col(i) = (1.0 - s) * pts.col(i) + s * pts.col(i + 1);
  }
  return pts.col(0);
}

double poly(const Eigen::Matrix<double, 6, 1>& c, double u) {
  double r = 0.0;
  for (int i = 5; i >= 0; --i) r = r * u + c(i);
  return r;
}

double poly_d1(const Eigen::Matrix<double, 6, 1>& c, double u) {
  double r = 0.0;
  for (int i = 5; i >= 1; --i) r = r * u + i * c(i);
  return r;
}

double poly_d2(const Eigen::Matrix<double, 6, 1>& c, double u) {
  double r = 0.0;
  for (int i = 5; i >= 2; --i) r = r * u + i * (i - 1) * c(i);
  return r;
}

}  // namespace

PhaseProfile BezierOutputs::evaluate(double theta) const {
  const int m = degree();
  const double span = theta_minus - theta_plus;
  const double s = phase(theta);
  PhaseProfile out;
  out.value = de_casteljau(coeffs, s);
  if (m >= 1) {
    Eigen::Matrix<double, 4, Eigen::Dynamic> d1(4, m);
    for (int i = 0; i < m; ++i) d1.col(i) = m * (coeffs.col(i + 1) - coeffs.col(i));
    out.d1 = de_casteljau(d1, s) / span;
    if (m >= 2) {
      Eigen::Matrix<double, 4, Eigen::Dynamic> d2(4, m - 1);
      for (int i = 0; i < m - 1; ++i) d2.col(i) = (m - 1) * (d1.col(i + 1) - d1.col(i));
      out.d2 = de_casteljau(d2, s) / (span * span);
    }
  }
  return out;
}

Eigen::Vector3d BumpPolynomial::evaluate(double theta) const {
  if (theta >= theta_switch) return Eigen::Vector3d::Zero();
  const double span = theta_switch - theta_plus;
  const double u = (theta - theta_plus) / span;
  return {poly(coeffs, u), poly_d1(coeffs, u) / span, poly_d2(coeffs, u) / (span * span)};
}

BumpPolynomial build_bump(double theta_plus, double theta_minus) {
  if (!(std::isfinite(theta_plus) && std::isfinite(theta_minus)) || theta_plus == theta_minus) {
    throw Error(ErrorCode::kInvalidArgument, "bump needs a non-degenerate phase interval");
  }
  // Boundary conditions on monomial coefficients in u: b(0), b'(0), b(1), b'(1), b''(1).
  Eigen::Matrix<double, 5, 6> a;
  a << 1, 0, 0, 0, 0, 0,
       0, 1, 0, 0, 0, 0,
       1, 1, 1, 1, 1, 1,
       0, 1, 2, 3, 4, 5,
       0, 0, 2, 6, 12, 20;
  const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 6>> svd(a, Eigen::ComputeFullV);
  Eigen::Matrix<double, 6, 1> c = svd.matrixV().col(5);

  // Peak of |b| on (0, 1): coarse scan, then Newton on b'(u) = 0.
  double u_best = 0.0;
  double v_best = 0.0;
  constexpr int kScan = 200;
  for (int i = 1; i < kScan; ++i) {
    const double u = static_cast<double>(i) / kScan;
    const double v = std::abs(poly(c, u));
    if (v > v_best) {
      v_best = v;
      u_best = u;
    }
  }
  for (int it = 0; it < 50; ++it) {
    const double step = poly_d1(c, u_best) / poly_d2(c, u_best);
    u_best -= step;
    if (std::abs(step) < 1e-15) break;
  }
  c /= poly(c, u_best);

  BumpPolynomial b;
  b.coeffs = c;
  b.theta_plus = theta_plus;
  b.theta_switch = theta_plus + kBumpSupportFraction * (theta_minus - theta_plus);
  return b;
}

GaitParams GaitParams::from_base(BezierOutputs base, const Vec4& beta) {
  GaitParams g;
  g.bump = build_bump(base.theta_plus, base.theta_minus);
  g.base = std::move(base);
  g.beta = beta;
  return g;
}

PhaseProfile GaitParams::desired(double theta) const {
  PhaseProfile p = base.evaluate(theta);
  if (beta.squaredNorm() > 0.0) {
    const Eigen::Vector3d b = bump.evaluate(theta);
    p.value += beta * b(0);
    p.d1 += beta * b(1);
    p.d2 += beta * b(2);
  }
  return p;
}

Vec4 output(const Vec5& q, const GaitParams& gait) {
  return q.tail<4>() - gait.desired(BipedModel::theta(q)).value;
}

Mat4x5 output_jacobian(const Vec5& q, const GaitParams& gait) {
  const PhaseProfile p = gait.desired(BipedModel::theta(q));
  Mat4x5 j = Mat4x5::Zero();
  j.rightCols<4>().setIdentity();
  j -= p.d1 * BipedModel::theta_gradient().transpose();
  return j;
}

LieDerivatives lie_derivatives(const State& x, const GaitParams& gait, const BipedModel& model) {
  const double theta = BipedModel::theta(x.q);
  const double dtheta = BipedModel::theta_gradient().dot(x.dq);
  const PhaseProfile p = gait.desired(theta);

  LieDerivatives out;
  out.jacobian.setZero();
  out.jacobian.rightCols<4>().setIdentity();
  out.jacobian -= p.d1 * BipedModel::theta_gradient().transpose();

  const Mat5 d = model.mass_matrix(x.q);
  const Eigen::LLT<Mat5> llt(d);
  out.drift_acceleration = -llt.solve(model.bias_forces(x.q, x.dq));
  out.input_acceleration = llt.solve(BipedModel::input_matrix());

  out.y = x.q.tail<4>() - p.value;
  out.lf_h = out.jacobian * x.dq;
  out.lf2_h = out.jacobian * out.drift_acceleration - p.d2 * dtheta * dtheta;
  out.lg_lf_h = out.jacobian * out.input_acceleration;

  const double rcond = Eigen::PartialPivLU<Mat4>(out.lg_lf_h).rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(out.condition < kDecouplingConditionLimit)) {
    std::ostringstream msg;
    msg << "decoupling matrix is singular (condition " << out.condition << ", theta " << theta
        << ")";
    throw Error(ErrorCode::kSingularDecoupling, msg.str());
  }
  return out;
}

}  // namespace hzd
