#include "kpplab/field.hpp"

#include <bit>
#include <cmath>

#include "kpplab/error.hpp"

namespace kpplab {

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points) {
  if (n_points < 2 || !std::has_single_bit(n_points)) {
    throw Error(ErrorCode::domain, "grid size must be a power of two >= 2");
  }
  if (!(x_max > x_min)) throw Error(ErrorCode::domain, "grid needs x_max > x_min");
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

std::vector<double> Grid::points() const {
  std::vector<double> p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = x(i);
  return p;
}

Grid Grid::refined() const { return Grid(x_min_, x_max_, 2 * n_); }

Field::Field(Grid g, std::vector<double> v, double time, double left, double right,
             Orientation o)
    : grid(std::move(g)), values(std::move(v)), t(time), left_limit(left), right_limit(right),
      orientation(o) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::domain, "field values do not match the grid size");
  }
}

Field Field::constant(const Grid& g, double u, Orientation o) {
  const double stored = o == Orientation::value ? u : 1.0 - u;
  return Field(g, std::vector<double>(g.size(), stored), 0.0, stored, stored, o);
}

Field Field::heaviside(const Grid& g, Orientation o, double shift) {
  return from_function(
      g, [shift](double x) { return x + shift >= 0.0 ? 1.0 : 0.0; }, 0.0, 1.0, o);
}

Field Field::from_function(const Grid& g, const std::function<double(double)>& u, double left,
                           double right, Orientation o) {
  std::vector<double> v(g.size());
  const bool complement = o == Orientation::complement;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ui = u(g.x(i));
    v[i] = complement ? 1.0 - ui : ui;
  }
  return complement ? Field(g, std::move(v), 0.0, 1.0 - left, 1.0 - right, o)
                    : Field(g, std::move(v), 0.0, left, right, o);
}

std::vector<double> Field::u_values() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u(i);
  return out;
}

double Field::interpolate(double x) const {
  if (x < grid.x_min()) return left_limit;
  if (x > grid.x_max()) return right_limit;
  const double s = (x - grid.x_min()) / grid.dx();
  auto i = static_cast<std::size_t>(std::floor(s));
  if (i >= values.size() - 1) return values.back();
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

double Field::interpolate_u(double x) const {
  const double v = interpolate(x);
  return orientation == Orientation::value ? v : 1.0 - v;
}

Field Field::with_orientation(Orientation o) const {
  if (o == orientation) return *this;
  Field out = *this;
  out.orientation = o;
  for (auto& v : out.values) v = 1.0 - v;
  out.left_limit = 1.0 - left_limit;
  out.right_limit = 1.0 - right_limit;
  return out;
}

}  // namespace kpplab
