#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "billnet/drnet.hpp"
#include "billnet/hyperlattice.hpp"
#include "billnet/projective.hpp"

namespace billnet::test {

inline Vec v(std::initializer_list<double> xs) { return make_vec(xs); }
inline HomPoint pt(std::initializer_list<double> xs) { return HomPoint::from_affine(make_vec(xs)); }
inline DualHyperplane plane(std::initializer_list<double> xs) { return DualHyperplane(make_vec(xs)); }
inline QuadricParam q(double x) { return QuadricParam(x); }

inline ConfocalFamily family2() { return ConfocalFamily({4.0, 1.0}); }
inline ConfocalFamily family3() { return ConfocalFamily({9.0, 4.0, 1.0}); }

/// The m = 2 reference net: family (4,1), lambdas (0,-3), window 3x3.
inline DRNet reference_net2(std::vector<int> window = {3, 3}) {
  return build_net(family2(), {q(0), q(-3)}, ProjLine(v({0, 1}), v({1, -1})), window);
}

/// An m = 3 net in the family (9,4,1).
inline DRNet reference_net3(std::vector<int> window = {2, 2, 2}, const BuildOptions& options = {}) {
  return build_net(family3(), {q(0.5), q(-1), q(-3)}, ProjLine(v({0.1, -0.2, 0.05}), v({0.3, 0.5, -0.8})), window,
                   options);
}

/// Same ray, up to orientation: unit directions agree up to sign.
inline double direction_gap(const Vec& a, const Vec& b) {
  return std::min((a.normalized() - b.normalized()).norm(), (a.normalized() + b.normalized()).norm());
}

}  // namespace billnet::test
