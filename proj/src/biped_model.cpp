#include "hzd/biped_model.hpp"

#include <cmath>
#include <sstream>

namespace hzd {

namespace {

// Row i gives the absolute angle of link i as a linear form in q.
const Mat5& link_map() {
  static const Mat5 a = [] {
    Mat5 m;
    m << 1, 0, 0, 0, 0,  // torso
         1, 1, 0, 0, 0,  // stance femur
         1, 1, 0, 1, 0,  // stance shank
         1, 0, 1, 0, 0,  // swing femur
         1, 0, 1, 0, 1;  // swing shank
    return m;
  }();
  return a;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kSingularImpact: return "singular_impact";
    case ErrorCode::kInvalidImpact: return "invalid_impact";
    case ErrorCode::kSingularDecoupling: return "singular_decoupling";
    case ErrorCode::kNoImpact: return "no_impact";
    case ErrorCode::kGaitInvalid: return "gait_invalid";
    case ErrorCode::kIntegration: return "integration";
    case ErrorCode::kNewtonDivergence: return "newton_divergence";
    case ErrorCode::kSingularJacobian: return "singular_jacobian";
    case ErrorCode::kModelViolation: return "model_violation";
    case ErrorCode::kDesignFailed: return "design_failed";
    case ErrorCode::kUnreachable: return "unreachable";
    case ErrorCode::kMissingArtifact: return "missing_artifact";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kConstraintViolation: return "constraint_violation";
  }
  return "unknown";
}

void ModelParams::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfig, std::string("invalid model parameter: ") + what);
  };
  for (const auto* link : {&torso, &femur, &shank}) {
    check(link->mass > 0.0, "link mass must be positive");
    check(link->length > 0.0, "link length must be positive");
    check(link->inertia > 0.0, "link inertia must be positive");
    check(std::isfinite(link->com), "link COM offset must be finite");
  }
  check(gravity > 0.0, "gravity must be positive");
  check(torque_limit > 0.0, "torque_limit must be positive");
  check(friction_limit > 0.0 && friction_limit <= 1.0, "friction_limit must lie in (0, 1]");
  check(min_normal_force >= 0.0, "min_normal_force must be non-negative");
}

BipedModel::BipedModel(ModelParams params) : params_(params) {
  params_.validate();
  const double lt = params_.shank.length;
  const double lf = params_.femur.length;
  const double pt = params_.shank.com;
  const double pf = params_.femur.com;
  const double pT = params_.torso.com;

  auto point = [](std::initializer_list<Term> terms) {
    Point p;
    for (const Term& t : terms) p.terms[p.size++] = t;
    return p;
  };

  hip_ = point({{lt, kStanceShank}, {lf, kStanceFemur}});
  swing_toe_ = point({{lt, kStanceShank}, {lf, kStanceFemur}, {-lf, kSwingFemur}, {-lt, kSwingShank}});

  bodies_[0] = {params_.torso.mass, params_.torso.inertia, kTorso,
                point({{lt, kStanceShank}, {lf, kStanceFemur}, {pT, kTorso}})};
  bodies_[1] = {params_.femur.mass, params_.femur.inertia, kStanceFemur,
                point({{lt, kStanceShank}, {lf - pf, kStanceFemur}})};
  bodies_[2] = {params_.shank.mass, params_.shank.inertia, kStanceShank,
                point({{lt - pt, kStanceShank}})};
  bodies_[3] = {params_.femur.mass, params_.femur.inertia, kSwingFemur,
                point({{lt, kStanceShank}, {lf, kStanceFemur}, {-pf, kSwingFemur}})};
  bodies_[4] = {params_.shank.mass, params_.shank.inertia, kSwingShank,
                point({{lt, kStanceShank}, {lf, kStanceFemur}, {-lf, kSwingFemur}, {-pt, kSwingShank}})};
}

Vec5 BipedModel::link_angles(const Vec5& q) { return link_map() * q; }

Vec2 BipedModel::position(const Point& p, const Vec5& phi) const {
  Vec2 r = Vec2::Zero();
  for (int i = 0; i < p.size; ++i) {
    const double a = phi(p.terms[i].link);
    r += p.terms[i].coef * Vec2(std::sin(a), std::cos(a));
  }
  return r;
}

Mat2x5 BipedModel::jacobian(const Point& p, const Vec5& phi) const {
  Mat2x5 j = Mat2x5::Zero();
  for (int i = 0; i < p.size; ++i) {
    const int l = p.terms[i].link;
    const double a = phi(l);
    j += p.terms[i].coef * Vec2(std::cos(a), -std::sin(a)) * link_map().row(l);
  }
  return j;
}

Vec2 BipedModel::jdot_dq(const Point& p, const Vec5& phi, const Vec5& dphi) const {
  Vec2 r = Vec2::Zero();
  for (int i = 0; i < p.size; ++i) {
    const int l = p.terms[i].link;
    const double a = phi(l);
    r += p.terms[i].coef * dphi(l) * dphi(l) * Vec2(-std::sin(a), -std::cos(a));
  }
  return r;
}

Mat5 BipedModel::mass_matrix(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  Mat5 d = Mat5::Zero();
  for (const Body& b : bodies_) {
    const Mat2x5 j = jacobian(b.com, phi);
    d.noalias() += b.mass * j.transpose() * j;
    d.noalias() += b.inertia * link_map().row(b.link).transpose() * link_map().row(b.link);
  }
  return d.selfadjointView<Eigen::Upper>();
}

std::array<Mat5, 5> BipedModel::mass_matrix_partials(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  std::array<Mat5, 5> out;
  for (auto& m : out) m.setZero();
  for (const Body& b : bodies_) {
    const Mat2x5 j = jacobian(b.com, phi);
    for (int k = 0; k < 5; ++k) {
      Mat2x5 dj = Mat2x5::Zero();
      for (int i = 0; i < b.com.size; ++i) {
        const int l = b.com.terms[i].link;
        const double a = phi(l);
        dj += b.com.terms[i].coef * link_map()(l, k) * Vec2(-std::sin(a), -std::cos(a)) *
              link_map().row(l);
      }
      const Mat5 half = b.mass * dj.transpose() * j;
      out[k] += half + half.transpose();
    }
  }
  return out;
}

Mat5 BipedModel::coriolis_matrix(const Vec5& q, const Vec5& dq) const {
  const auto dd = mass_matrix_partials(q);
  Mat5 c = Mat5::Zero();
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int i = 0; i < 5; ++i) {
        s += 0.5 * (dd[i](k, j) + dd[j](k, i) - dd[k](i, j)) * dq(i);
      }
      c(k, j) = s;
    }
  }
  return c;
}

Vec5 BipedModel::gravity_vector(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  Vec5 g = Vec5::Zero();
  for (const Body& b : bodies_) {
    g += b.mass * params_.gravity * jacobian(b.com, phi).row(1).transpose();
  }
  return g;
}

Vec5 BipedModel::bias_forces(const Vec5& q, const Vec5& dq) const {
  // Sum over bodies of m J^T (dJ dq + g e_y); rotational terms carry no bias.
  const Vec5 phi = link_angles(q);
  const Vec5 dphi = link_map() * dq;
  Vec5 h = Vec5::Zero();
  for (const Body& b : bodies_) {
    const Vec2 a = jdot_dq(b.com, phi, dphi) + Vec2(0.0, params_.gravity);
    h.noalias() += b.mass * jacobian(b.com, phi).transpose() * a;
  }
  return h;
}

Mat5x4 BipedModel::input_matrix() {
  Mat5x4 b = Mat5x4::Zero();
  b.bottomRows<4>().setIdentity();
  return b;
}

Vec5 BipedModel::forward_dynamics(const Vec5& q, const Vec5& dq, const Vec4& u) const {
  const Mat5 d = mass_matrix(q);
  return d.llt().solve(input_matrix() * u - bias_forces(q, dq));
}

double BipedModel::kinetic_energy(const Vec5& q, const Vec5& dq) const {
  return 0.5 * dq.dot(mass_matrix(q) * dq);
}

double BipedModel::potential_energy(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  double v = 0.0;
  for (const Body& b : bodies_) v += b.mass * params_.gravity * position(b.com, phi).y();
  return v;
}

Vec2 BipedModel::hip(const Vec5& q) const { return position(hip_, link_angles(q)); }

Vec2 BipedModel::swing_toe(const Vec5& q) const { return position(swing_toe_, link_angles(q)); }

Mat2x5 BipedModel::swing_toe_jacobian(const Vec5& q) const {
  return jacobian(swing_toe_, link_angles(q));
}

Vec2 BipedModel::center_of_mass(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  Vec2 r = Vec2::Zero();
  for (const Body& b : bodies_) r += b.mass * position(b.com, phi);
  return r / params_.total_mass();
}

Mat2x5 BipedModel::com_jacobian(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  Mat2x5 j = Mat2x5::Zero();
  for (const Body& b : bodies_) j += b.mass * jacobian(b.com, phi);
  return j / params_.total_mass();
}

Vec2 BipedModel::com_bias_acceleration(const Vec5& q, const Vec5& dq) const {
  const Vec5 phi = link_angles(q);
  const Vec5 dphi = link_map() * dq;
  Vec2 r = Vec2::Zero();
  for (const Body& b : bodies_) r += b.mass * jdot_dq(b.com, phi, dphi);
  return r / params_.total_mass();
}

Mat5 BipedModel::relabel_matrix() {
  Mat5 r = Mat5::Zero();
  r(0, 0) = 1.0;
  r(1, 2) = 1.0;
  r(2, 1) = 1.0;
  r(3, 4) = 1.0;
  r(4, 3) = 1.0;
  return r;
}

Mat7 BipedModel::extended_mass_matrix(const Vec5& q) const {
  const Vec5 phi = link_angles(q);
  Mat7 de = Mat7::Zero();
  de.topLeftCorner<5, 5>() = mass_matrix(q);
  Eigen::Matrix<double, 5, 2> coupling = Eigen::Matrix<double, 5, 2>::Zero();
  for (const Body& b : bodies_) coupling += b.mass * jacobian(b.com, phi).transpose();
  de.topRightCorner<5, 2>() = coupling;
  de.bottomLeftCorner<2, 5>() = coupling.transpose();
  de.bottomRightCorner<2, 2>() = params_.total_mass() * Eigen::Matrix2d::Identity();
  return de;
}

ImpactResult BipedModel::impact(const State& pre) const {
  const Mat7 de = extended_mass_matrix(pre.q);
  Eigen::Matrix<double, 2, 7> e2;
  e2.leftCols<5>() = swing_toe_jacobian(pre.q);
  e2.rightCols<2>().setIdentity();

  Eigen::Matrix<double, 9, 9> a = Eigen::Matrix<double, 9, 9>::Zero();
  a.topLeftCorner<7, 7>() = de;
  a.topRightCorner<7, 2>() = -e2.transpose();
  a.bottomLeftCorner<2, 7>() = e2;

  Vec7 dqe = Vec7::Zero();
  dqe.head<5>() = pre.dq;
  Eigen::Matrix<double, 9, 1> rhs = Eigen::Matrix<double, 9, 1>::Zero();
  rhs.head<7>() = de * dqe;

  const Eigen::FullPivLU<Eigen::Matrix<double, 9, 9>> lu(a);
  if (lu.rcond() < 1e-12) {
    std::ostringstream msg;
    msg << "impact system is ill-conditioned (rcond " << lu.rcond() << ")";
    throw Error(ErrorCode::kSingularImpact, msg.str());
  }
  const Eigen::Matrix<double, 9, 1> sol = lu.solve(rhs);

  const Mat5 r = relabel_matrix();
  ImpactResult out;
  out.post.q = r * pre.q;
  out.post.dq = r * sol.head<5>();
  out.impulse = sol.tail<2>();
  out.lift_velocity = swing_foot_velocity(out.post.q, out.post.dq);
  out.valid = out.impulse.y() > 0.0 && out.lift_velocity > 0.0;
  return out;
}

GroundForce BipedModel::ground_reaction_from_acceleration(const State& x, const Vec5& ddq) const {
  const double m = params_.total_mass();
  const Vec2 acc = com_jacobian(x.q) * ddq + com_bias_acceleration(x.q, x.dq);
  return {m * acc.x(), m * (acc.y() + params_.gravity)};
}

GroundForce BipedModel::ground_reaction(const State& x, const Vec4& u) const {
  return ground_reaction_from_acceleration(x, forward_dynamics(x.q, x.dq, u));
}

}  // namespace hzd
