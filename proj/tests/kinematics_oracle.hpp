#pragma once

// Test-only forward kinematics written joint by joint, independent of the
// term tables inside BipedModel. Templated on the scalar so velocities can be
// taken by complex-step differentiation.

#include <array>
#include <cmath>
#include <complex>

#include "hzd/model_params.hpp"
#include "hzd/types.hpp"

namespace hzd::oracle {

template <class T>
struct Pose {
  std::array<std::array<T, 2>, 5> com;  // torso, st femur, st shank, sw femur, sw shank
  std::array<T, 5> angle;
  std::array<T, 2> hip;
  std::array<T, 2> swing_toe;
};

template <class T>
Pose<T> pose(const std::array<T, 5>& q, const ModelParams& p) {
  using std::cos;
  using std::sin;
  Pose<T> out;
  const T torso = q[0];
  const T st_femur = q[0] + q[1];
  const T st_shank = st_femur + q[3];
  const T sw_femur = q[0] + q[2];
  const T sw_shank = sw_femur + q[4];
  out.angle = {torso, st_femur, st_shank, sw_femur, sw_shank};

  const T knee_x = p.shank.length * sin(st_shank);
  const T knee_y = p.shank.length * cos(st_shank);
  const T hip_x = knee_x + p.femur.length * sin(st_femur);
  const T hip_y = knee_y + p.femur.length * cos(st_femur);
  out.hip = {hip_x, hip_y};

  out.com[2] = {knee_x - p.shank.com * sin(st_shank), knee_y - p.shank.com * cos(st_shank)};
  out.com[1] = {hip_x - p.femur.com * sin(st_femur), hip_y - p.femur.com * cos(st_femur)};
  out.com[0] = {hip_x + p.torso.com * sin(torso), hip_y + p.torso.com * cos(torso)};
  out.com[3] = {hip_x - p.femur.com * sin(sw_femur), hip_y - p.femur.com * cos(sw_femur)};
  const T sw_knee_x = hip_x - p.femur.length * sin(sw_femur);
  const T sw_knee_y = hip_y - p.femur.length * cos(sw_femur);
  out.com[4] = {sw_knee_x - p.shank.com * sin(sw_shank), sw_knee_y - p.shank.com * cos(sw_shank)};
  out.swing_toe = {sw_knee_x - p.shank.length * sin(sw_shank),
                   sw_knee_y - p.shank.length * cos(sw_shank)};
  return out;
}

inline std::array<double, 5> masses(const ModelParams& p) {
  return {p.torso.mass, p.femur.mass, p.shank.mass, p.femur.mass, p.shank.mass};
}

inline std::array<double, 5> inertias(const ModelParams& p) {
  return {p.torso.inertia, p.femur.inertia, p.shank.inertia, p.femur.inertia, p.shank.inertia};
}

/// Link COM velocities and angular rates by complex step along dq.
struct LinkVelocities {
  std::array<std::array<double, 2>, 5> v;
  std::array<double, 5> w;
};

inline LinkVelocities link_velocities(const Vec5& q, const Vec5& dq, const ModelParams& p) {
  constexpr double h = 1e-30;
  std::array<std::complex<double>, 5> qc;
  for (int i = 0; i < 5; ++i) qc[i] = {q(i), h * dq(i)};
  const Pose<std::complex<double>> ps = pose(qc, p);
  LinkVelocities out;
  for (int b = 0; b < 5; ++b) {
    out.v[b] = {ps.com[b][0].imag() / h, ps.com[b][1].imag() / h};
    out.w[b] = ps.angle[b].imag() / h;
  }
  return out;
}

inline double kinetic_energy(const Vec5& q, const Vec5& dq, const ModelParams& p) {
  const LinkVelocities lv = link_velocities(q, dq, p);
  const auto m = masses(p);
  const auto in = inertias(p);
  double ke = 0.0;
  for (int b = 0; b < 5; ++b) {
    ke += 0.5 * m[b] * (lv.v[b][0] * lv.v[b][0] + lv.v[b][1] * lv.v[b][1]);
    ke += 0.5 * in[b] * lv.w[b] * lv.w[b];
  }
  return ke;
}

/// Total linear momentum.
inline Vec2 momentum(const Vec5& q, const Vec5& dq, const ModelParams& p) {
  const LinkVelocities lv = link_velocities(q, dq, p);
  const auto m = masses(p);
  Vec2 out = Vec2::Zero();
  for (int b = 0; b < 5; ++b) out += m[b] * Vec2(lv.v[b][0], lv.v[b][1]);
  return out;
}

inline double potential_energy(const Vec5& q, const ModelParams& p) {
  std::array<double, 5> qa;
  for (int i = 0; i < 5; ++i) qa[i] = q(i);
  const Pose<double> ps = pose(qa, p);
  const auto m = masses(p);
  double v = 0.0;
  for (int b = 0; b < 5; ++b) v += m[b] * p.gravity * ps.com[b][1];
  return v;
}

/// Gradient of the potential energy by complex step.
inline Vec5 potential_gradient(const Vec5& q, const ModelParams& p) {
  constexpr double h = 1e-30;
  const auto m = masses(p);
  Vec5 g;
  for (int k = 0; k < 5; ++k) {
    std::array<std::complex<double>, 5> qc;
    for (int i = 0; i < 5; ++i) qc[i] = {q(i), i == k ? h : 0.0};
    const auto ps = pose(qc, p);
    double s = 0.0;
    for (int b = 0; b < 5; ++b) s += m[b] * p.gravity * ps.com[b][1].imag() / h;
    g(k) = s;
  }
  return g;
}

}  // namespace hzd::oracle
