#include "lcs/grid.hpp"

#include <algorithm>
#include <stdexcept>

#include "lcs/errors.hpp"

namespace lcs {

Axis::Axis(std::vector<double> coords, std::string name, std::string units)
    : coords_(std::move(coords)), name_(std::move(name)), units_(std::move(units)) {
  for (std::size_t i = 1; i < coords_.size(); ++i) {
    if (!(coords_[i] > coords_[i - 1])) throw FormatError("axis coordinates must be strictly increasing");
  }
  uniform_ = true;
  if (coords_.size() > 2) {
    const double h = (coords_.back() - coords_.front()) / static_cast<double>(coords_.size() - 1);
    for (std::size_t i = 1; i < coords_.size(); ++i) {
      if (std::abs((coords_[i] - coords_[i - 1]) - h) > 1e-9 * std::abs(h)) {
        uniform_ = false;
        break;
      }
    }
  }
}

Axis Axis::uniform(double start, double step, int size, std::string name, std::string units) {
  if (size < 1 || !(step > 0)) throw FormatError("uniform axis needs size >= 1 and step > 0");
  std::vector<double> c(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) c[static_cast<std::size_t>(i)] = start + step * i;
  return Axis(std::move(c), std::move(name), std::move(units));
}

Axis Axis::linspace(double lo, double hi, int size, std::string name, std::string units) {
  if (size < 2 || !(hi > lo)) throw FormatError("linspace axis needs size >= 2 and hi > lo");
  std::vector<double> c(static_cast<std::size_t>(size));
  const double h = (hi - lo) / (size - 1);
  for (int i = 0; i < size; ++i) c[static_cast<std::size_t>(i)] = lo + h * i;
  c.back() = hi;
  return Axis(std::move(c), std::move(name), std::move(units));
}

double Axis::step() const {
  if (coords_.size() < 2) return 0.0;
  return (coords_.back() - coords_.front()) / static_cast<double>(coords_.size() - 1);
}

std::optional<std::pair<int, double>> Axis::locate(double x) const {
  const int n = size();
  if (n < 2 || !(x >= coords_.front()) || !(x <= coords_.back())) return std::nullopt;
  int i;
  if (uniform_) {
    const double h = step();
    i = static_cast<int>(std::floor((x - coords_.front()) / h));
    i = std::clamp(i, 0, n - 2);
    // guard against rounding in the division
    if (x < coords_[static_cast<std::size_t>(i)] && i > 0) --i;
    if (x > coords_[static_cast<std::size_t>(i) + 1] && i < n - 2) ++i;
  } else {
    auto it = std::upper_bound(coords_.begin(), coords_.end(), x);
    i = static_cast<int>(it - coords_.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
  }
  const double x0 = coords_[static_cast<std::size_t>(i)];
  const double x1 = coords_[static_cast<std::size_t>(i) + 1];
  double frac = (x - x0) / (x1 - x0);
  frac = std::clamp(frac, 0.0, 1.0);
  return std::make_pair(i, frac);
}

}  // namespace lcs
