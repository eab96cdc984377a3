#pragma once

#include <stdexcept>
#include <string>

namespace billnet {

enum class ErrorKind {
  invalid_argument,
  point_at_infinity,
  hyperplane_at_infinity,
  not_collinear,
  not_in_pencil,
  coincident,
  degenerate_tangency,
  no_intersection,
  tangential_incidence,
  not_on_quadric,
  branch_failure,
  closure_mismatch,
  unsupported,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::point_at_infinity: return "point at infinity";
    case ErrorKind::hyperplane_at_infinity: return "hyperplane at infinity";
    case ErrorKind::not_collinear: return "points not collinear";
    case ErrorKind::not_in_pencil: return "hyperplanes not in a pencil";
    case ErrorKind::coincident: return "coincident elements";
    case ErrorKind::degenerate_tangency: return "degenerate tangency";
    case ErrorKind::no_intersection: return "no real intersection";
    case ErrorKind::tangential_incidence: return "tangential incidence";
    case ErrorKind::not_on_quadric: return "point not on quadric";
    case ErrorKind::branch_failure: return "branch selection failure";
    case ErrorKind::closure_mismatch: return "double reflection closure mismatch";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::io: return "i/o failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch on it without parsing messages.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Tolerances shared by the verification code. Defaults are the documented
/// scene defaults.
struct Tolerances {
  double rank = 1e-9;     // relative singular-value threshold
  double cr = 1e-7;       // |CR + 1| for harmonic checks
  double caustic = 1e-8;  // relative drift of caustic parameters
  double forward = 1e-9;  // minimal forward line parameter in trajectories
};

}  // namespace billnet
