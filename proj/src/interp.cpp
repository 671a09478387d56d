#include "emsrl/interp.hpp"

#include <algorithm>
#include <stdexcept>

namespace emsrl {

bool strictly_increasing(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(),
                            [](double a, double b) { return !(a < b); }) == v.end();
}

Bracket bracket(std::span<const double> axis, double x) {
  if (axis.size() < 2 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  const auto i = static_cast<std::size_t>(it - axis.begin()) - 1;
  return {i, (x - axis[i]) / (axis[i + 1] - axis[i])};
}

Table1D::Table1D(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (x_.size() != y_.size() || x_.empty())
    throw std::invalid_argument("Table1D: axis and values must be non-empty and equal length");
  if (!strictly_increasing(x_))
    throw std::invalid_argument("Table1D: axis must be strictly increasing");
}

double Table1D::operator()(double x) const {
  if (x_.size() == 1) return y_.front();
  const auto [i, t] = bracket(x_, x);
  if (t == 0.0) return y_[i];
  if (t == 1.0) return y_[i + 1];
  return y_[i] + t * (y_[i + 1] - y_[i]);
}

}  // namespace emsrl
