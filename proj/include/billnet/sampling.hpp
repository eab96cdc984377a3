#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "billnet/billiards.hpp"
#include "billnet/confocal.hpp"

namespace billnet {

/// Random line meeting every listed family member in two distinct real points.
/// The base point is drawn inside the innermost ellipsoidal member, so every
/// ellipsoid (lambda < a_d) is crossed transversally.
template <class Rng>
ProjLine random_chord(const ConfocalFamily& f, const std::vector<QuadricParam>& lambdas, Rng& rng,
                      double shrink = 0.6) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double lmax = lambdas.empty() ? 0.0 : lambdas.front().value;
  for (QuadricParam l : lambdas) lmax = std::max(lmax, l.value);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vec dir(f.dim()), base(f.dim());
    for (int i = 0; i < f.dim(); ++i) dir[i] = gauss(rng);
    for (int i = 0; i < f.dim(); ++i) base[i] = gauss(rng);
    // uniform in the ball, then stretched into the innermost ellipsoid
    const double radius = shrink * std::pow(unit(rng), 1.0 / f.dim()) / base.norm();
    for (int i = 0; i < f.dim(); ++i) base[i] *= radius * std::sqrt(std::max(f.semi_axis(i) - lmax, 1e-12));
    if (dir.norm() < 1e-6) continue;
    const ProjLine line(base, dir);
    bool ok = true;
    for (QuadricParam l : lambdas) {
      const auto hit = intersect(f, l, line);
      ok = ok && hit && !hit->tangent && (hit->t_far - hit->t_near) > 1e-3;
    }
    if (ok) return line;
  }
  throw GeometryError(ErrorKind::no_intersection, "could not sample a chord crossing every quadric");
}

/// Distinct random ellipsoidal parameters below a_d, sorted descending.
template <class Rng>
std::vector<QuadricParam> random_ellipsoid_params(const ConfocalFamily& f, int count, Rng& rng) {
  const double top = f.semi_axis(f.dim() - 1);
  std::uniform_real_distribution<double> pick(-3.0 * top - 2.0, 0.8 * top);
  std::vector<double> values;
  while (static_cast<int>(values.size()) < count) {
    const double v = pick(rng);
    bool far_enough = true;
    for (double w : values) far_enough = far_enough && std::abs(v - w) > 0.2;
    if (far_enough) values.push_back(v);
  }
  std::sort(values.rbegin(), values.rend());
  std::vector<QuadricParam> out;
  for (double v : values) out.emplace_back(v);
  return out;
}

}  // namespace billnet
