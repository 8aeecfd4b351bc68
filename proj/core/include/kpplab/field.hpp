#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace kpplab {

/// Uniform grid x_i = x_min + i dx, i = 0..n-1, with n a power of two.
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }
  std::vector<double> points() const;

  /// Same interval with twice as many intervals (n -> 2n).
  Grid refined() const;

 private:
  double x_min_, x_max_;
  std::size_t n_;
  double dx_;
};

/// How Field::values relate to the solution u of the S-equation. The
/// complement stores q = 1 - u, which keeps full relative precision where u
/// is close to 1 (the unstable state that the front invades).
enum class Orientation { value, complement };

/// Gridded u(., t), extended by constants outside the grid.
struct Field {
  Grid grid;
  std::vector<double> values;
  double t = 0.0;
  double left_limit = 0.0;
  double right_limit = 0.0;
  Orientation orientation = Orientation::value;

  Field(Grid g, std::vector<double> v, double time, double left, double right,
        Orientation o = Orientation::value);

  static Field constant(const Grid& g, double u, Orientation o = Orientation::value);
  /// u = 1 on [0, inf), 0 on (-inf, 0).
  static Field heaviside(const Grid& g, Orientation o = Orientation::value, double shift = 0.0);
  static Field from_function(const Grid& g, const std::function<double(double)>& u,
                             double left, double right, Orientation o = Orientation::value);

  std::size_t size() const { return values.size(); }
  /// Solution value u at grid index i regardless of orientation.
  double u(std::size_t i) const {
    return orientation == Orientation::value ? values[i] : 1.0 - values[i];
  }
  double u_left() const { return orientation == Orientation::value ? left_limit : 1.0 - left_limit; }
  double u_right() const {
    return orientation == Orientation::value ? right_limit : 1.0 - right_limit;
  }
  std::vector<double> u_values() const;

  /// Linear interpolation of the stored values with constant extension.
  double interpolate(double x) const;
  double interpolate_u(double x) const;

  Field with_orientation(Orientation o) const;
};

}  // namespace kpplab
