#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace emsrl {

// Piecewise-linear table y(x) over a strictly increasing axis. Queries outside
// the axis are clamped to the end points.
class Table1D {
 public:
  Table1D() = default;
  Table1D(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;

  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// Locates x on a strictly increasing axis: returns the lower bracket index i
// and the fraction t in [0,1] such that x ~ axis[i] + t (axis[i+1]-axis[i]).
// Out-of-range x is clamped.
struct Bracket {
  std::size_t index;
  double frac;
};
Bracket bracket(std::span<const double> axis, double x);

bool strictly_increasing(std::span<const double> v);

}  // namespace emsrl
