#pragma once

#include <compare>
#include <sstream>
#include <string>
#include <vector>

#include "billnet/error.hpp"

namespace billnet {

/// Vertex of Z^m.
using LatticePoint = std::vector<int>;

inline std::string format_point(const std::vector<int>& n) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? "," : "") << n[i];
  os << ')';
  return os.str();
}

inline LatticePoint shifted(LatticePoint n, int direction, int by = 1) {
  n[static_cast<std::size_t>(direction)] += by;
  return n;
}

/// Calls fn for every point of prod_j [0, window_j] in lexicographic order.
template <class Fn>
void for_each_lattice_point(const std::vector<int>& window, Fn&& fn) {
  for (int extent : window) {
    if (extent < 0) return;
  }
  LatticePoint n(window.size(), 0);
  while (true) {
    fn(static_cast<const LatticePoint&>(n));
    int k = static_cast<int>(n.size()) - 1;
    while (k >= 0 && n[static_cast<std::size_t>(k)] == window[static_cast<std::size_t>(k)]) {
      n[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) return;
    ++n[static_cast<std::size_t>(k)];
  }
}

inline bool in_window(const LatticePoint& n, const std::vector<int>& window) {
  if (n.size() != window.size()) return false;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 0 || n[i] > window[i]) return false;
  }
  return true;
}

/// Midpoint of a Z^m edge in doubled coordinates 2 n0 + e_i; exactly one
/// coordinate is odd and its index is the edge direction (0-based here).
class MidVertex {
 public:
  explicit MidVertex(std::vector<int> dcoords) : d_(std::move(dcoords)) {
    int odd = 0;
    for (std::size_t i = 0; i < d_.size(); ++i) {
      if (d_[i] % 2 != 0) {
        ++odd;
        dir_ = static_cast<int>(i);
      }
    }
    if (odd != 1) {
      throw GeometryError(ErrorKind::invalid_argument,
                          "doubled coordinates " + format_point(d_) + " need exactly one odd entry");
    }
  }

  static MidVertex of_edge(const LatticePoint& start, int direction) {
    std::vector<int> d(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) d[i] = 2 * start[i];
    d[static_cast<std::size_t>(direction)] += 1;
    return MidVertex(std::move(d));
  }

  const std::vector<int>& dcoords() const { return d_; }
  int direction() const { return dir_; }
  int m() const { return static_cast<int>(d_.size()); }

  LatticePoint edge_start() const {
    LatticePoint n(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i) n[i] = (d_[i] - (static_cast<int>(i) == dir_ ? 1 : 0)) / 2;
    return n;
  }
  LatticePoint edge_end() const { return shifted(edge_start(), dir_); }

  friend auto operator<=>(const MidVertex& a, const MidVertex& b) { return a.d_ <=> b.d_; }
  friend bool operator==(const MidVertex& a, const MidVertex& b) { return a.d_ == b.d_; }

 private:
  std::vector<int> d_;
  int dir_ = 0;
};

}  // namespace billnet
