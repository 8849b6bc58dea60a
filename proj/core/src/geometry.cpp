#include "covstein/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "covstein/analytic.hpp"
#include "covstein/errors.hpp"
#include "covstein/rng.hpp"

namespace covstein {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

// ModelParams ---------------------------------------------------------------

ModelParams::ModelParams(int d, std::int64_t n, double rho,
                         bool allow_high_dimension)
    : d_(d), n_(n), rho_(rho) {
  const int cap = allow_high_dimension ? kMaxDimension : kDefaultMaxDimension;
  if (d < 1 || d > cap) {
    throw DomainError("dimension must lie in [1, " + std::to_string(cap) +
                      "], got " + std::to_string(d));
  }
  if (n < 4) throw DomainError("n must be >= 4, got " + std::to_string(n));
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw DomainError("rho must be finite and > 0");
  }
  const double nd = static_cast<double>(n);
  side_ = d == 1 ? nd : std::pow(nd, 1.0 / d);
  phi_ = unit_ball_volume(d) * std::pow(rho, d);

  validity_.mean_formulas = 2.0 * rho < side_;
  validity_.variance_formulas = 4.0 * rho < side_;
  validity_.theorem_V = nd > ipow(6.0, d) * phi_;
  validity_.theorem_S =
      nd > std::max(ipow(3.0, d), ipow(2.0, d + 1) + 1.0) * phi_;
}

void ModelParams::require_mean_formulas() const {
  if (!validity_.mean_formulas) {
    throw ValidityError("2*rho < n^(1/d)", "2*rho = " + fmt_double(2 * rho_) +
                                               ", n^(1/d) = " + fmt_double(side_));
  }
}

void ModelParams::require_variance_formulas() const {
  if (!validity_.variance_formulas) {
    throw ValidityError("4*rho < n^(1/d)", "4*rho = " + fmt_double(4 * rho_) +
                                               ", n^(1/d) = " + fmt_double(side_));
  }
}

void ModelParams::require_theorem_V() const {
  if (!validity_.theorem_V) {
    throw ValidityError("n > 6^d*phi",
                        "6^d*phi = " + fmt_double(ipow(6.0, d_) * phi_));
  }
}

void ModelParams::require_theorem_S() const {
  if (!validity_.theorem_S) {
    const double c = std::max(ipow(3.0, d_), ipow(2.0, d_ + 1) + 1.0);
    throw ValidityError("n > max(3^d, 2^(d+1)+1)*phi",
                        "max(3^d, 2^(d+1)+1)*phi = " + fmt_double(c * phi_));
  }
}

// TorusPoint ----------------------------------------------------------------

TorusPoint::TorusPoint(std::span<const double> coords)
    : dim_(static_cast<int>(coords.size())) {
  if (coords.empty() || coords.size() > static_cast<std::size_t>(kMaxDimension)) {
    throw DomainError("point dimension must lie in [1, " +
                      std::to_string(kMaxDimension) + "]");
  }
  std::copy(coords.begin(), coords.end(), c_.begin());
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(std::span<const double>(coords.begin(), coords.size())) {}

void TorusPoint::check_inside(double side) const {
  for (int i = 0; i < dim_; ++i) {
    if (!(c_[static_cast<std::size_t>(i)] >= 0.0 &&
          c_[static_cast<std::size_t>(i)] < side)) {
      throw DomainError("coordinate " + fmt_double(c_[static_cast<std::size_t>(i)]) +
                        " outside [0, " + fmt_double(side) + ")");
    }
  }
}

// Metric --------------------------------------------------------------------

double wrap_coordinate(double x, double side) noexcept {
  double w = x - side * std::floor(x / side);
  if (w >= side) w = std::nextafter(side, 0.0);
  if (w < 0.0) w = 0.0;
  return w;
}

double toroidal_distance2(std::span<const double> x, std::span<const double> y,
                          double side) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::abs(x[i] - y[i]);
    dx = std::min(dx, side - dx);
    s += dx * dx;
  }
  return s;
}

double toroidal_distance(const TorusPoint& x, const TorusPoint& y, double side) {
  if (x.dim() != y.dim()) {
    throw DomainError("toroidal_distance: dimension mismatch");
  }
  return std::sqrt(toroidal_distance2(x.coords(), y.coords(), side));
}

void toroidal_displacement(std::span<const double> x, std::span<const double> y,
                           double side, std::span<double> out) noexcept {
  const double half = 0.5 * side;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = y[i] - x[i];
    if (dx > half) {
      dx -= side;
    } else if (dx < -half) {
      dx += side;
    }
    out[i] = dx;
  }
}

// PointConfiguration --------------------------------------------------------

PointConfiguration::PointConfiguration(int dim, double side,
                                       std::vector<double> coords,
                                       double index_radius)
    : dim_(dim),
      side_(side),
      count_(0),
      coords_(std::move(coords)),
      index_radius_(index_radius) {
  if (dim < 1 || dim > kMaxDimension) {
    throw DomainError("configuration dimension out of range");
  }
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw DomainError("torus side must be finite and > 0");
  }
  if (!(index_radius > 0.0) || !std::isfinite(index_radius)) {
    throw DomainError("index radius must be finite and > 0");
  }
  if (coords_.size() % static_cast<std::size_t>(dim) != 0) {
    throw DomainError("coordinate count is not a multiple of the dimension");
  }
  count_ = coords_.size() / static_cast<std::size_t>(dim);
  if (count_ >= std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("too many points for the grid index");
  }
  for (double x : coords_) {
    if (!(x >= 0.0 && x < side)) {
      throw DomainError("coordinate " + fmt_double(x) + " outside [0, " +
                        fmt_double(side) + ")");
    }
  }
  build_index();
}

void PointConfiguration::build_index() {
  // Keep the total cell count O(n): at most max(4n, 64) cells.
  const double budget = std::max(4.0 * static_cast<double>(count_), 64.0);
  const double per_axis_cap = std::floor(std::pow(budget, 1.0 / dim_));
  const double wanted = std::floor(side_ / index_radius_);
  const double k = std::clamp(std::min(wanted, per_axis_cap), 1.0, 1.0e6);
  cells_per_axis_ = static_cast<int>(k);
  cell_edge_ = side_ / cells_per_axis_;

  std::size_t cells = 1;
  for (int a = 0; a < dim_; ++a) cells *= static_cast<std::size_t>(cells_per_axis_);

  std::vector<std::uint32_t> owner(count_);
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < count_; ++i) {
    std::size_t cell = 0;
    const auto p = point(i);
    for (int a = dim_ - 1; a >= 0; --a) {
      cell = cell * static_cast<std::size_t>(cells_per_axis_) +
             static_cast<std::size_t>(cell_of(p[static_cast<std::size_t>(a)]));
    }
    owner[i] = static_cast<std::uint32_t>(cell);
    ++cell_start_[cell + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.assign(count_, 0);
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < count_; ++i) {
    cell_items_[fill[owner[i]]++] = static_cast<std::uint32_t>(i);
  }
}

int PointConfiguration::cell_of(double x) const noexcept {
  const int c = static_cast<int>(x / cell_edge_);
  return std::clamp(c, 0, cells_per_axis_ - 1);
}

void PointConfiguration::check_query_radius(double r) const {
  if (!(r >= 0.0)) throw DomainError("query radius must be >= 0");
  if (r > supported_radius() * (1.0 + 1e-12)) {
    throw DomainError("query radius " + fmt_double(r) +
                      " exceeds the supported radius " +
                      fmt_double(supported_radius()));
  }
}

std::vector<std::size_t> PointConfiguration::neighbors_within(
    const TorusPoint& center, double r) const {
  if (center.dim() != dim_) {
    throw DomainError("neighbors_within: dimension mismatch");
  }
  std::vector<std::size_t> ids;
  visit_within(center.coords(), r, [&](std::size_t id, double) {
    ids.push_back(id);
    return true;
  });
  std::sort(ids.begin(), ids.end());
  return ids;
}

PointConfiguration PointConfiguration::with_point_added(const TorusPoint& p) const {
  if (p.dim() != dim_) throw DomainError("with_point_added: dimension mismatch");
  std::vector<double> c = coords_;
  c.insert(c.end(), p.coords().begin(), p.coords().end());
  return PointConfiguration(dim_, side_, std::move(c), index_radius_);
}

PointConfiguration PointConfiguration::with_point_removed(std::size_t i) const {
  if (i >= count_) throw DomainError("with_point_removed: index out of range");
  std::vector<double> c = coords_;
  const auto first = c.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(dim_));
  c.erase(first, first + dim_);
  return PointConfiguration(dim_, side_, std::move(c), index_radius_);
}

PointConfiguration PointConfiguration::with_point_moved(std::size_t i,
                                                        const TorusPoint& p) const {
  if (i >= count_) throw DomainError("with_point_moved: index out of range");
  if (p.dim() != dim_) throw DomainError("with_point_moved: dimension mismatch");
  std::vector<double> c = coords_;
  std::copy(p.coords().begin(), p.coords().end(),
            c.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(dim_)));
  return PointConfiguration(dim_, side_, std::move(c), index_radius_);
}

PointConfiguration PointConfiguration::translated(const TorusPoint& shift) const {
  if (shift.dim() != dim_) throw DomainError("translated: dimension mismatch");
  std::vector<double> c = coords_;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = wrap_coordinate(c[i] + shift[static_cast<int>(i % static_cast<std::size_t>(dim_))], side_);
  }
  return PointConfiguration(dim_, side_, std::move(c), index_radius_);
}

PointConfiguration sample_configuration(const ModelParams& params,
                                        std::uint64_t seed) {
  CounterRng rng(seed);
  const auto n = static_cast<std::size_t>(params.n());
  const auto d = static_cast<std::size_t>(params.dim());
  const double side = params.side();
  std::vector<double> coords(n * d);
  for (double& x : coords) x = wrap_coordinate(side * rng.uniform01(), side);
  return PointConfiguration(params.dim(), side, std::move(coords), params.rho());
}

// I/O -----------------------------------------------------------------------

void write_points_csv(const PointConfiguration& config, std::ostream& out) {
  const auto d = static_cast<std::size_t>(config.dim());
  for (std::size_t a = 0; a < d; ++a) out << (a ? ",x" : "x") << a;
  out << '\n';
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto p = config.point(i);
    for (std::size_t a = 0; a < d; ++a) out << (a ? "," : "") << p[a];
    out << '\n';
  }
  out.precision(old_precision);
}

PointConfiguration read_points_csv(std::istream& in, double side,
                                   double index_radius) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("points CSV: missing header");
  const int d = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int fields = 0;
    while (std::getline(row, cell, ',')) {
      try {
        coords.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DomainError("points CSV: bad number '" + cell + "'");
      }
      ++fields;
    }
    if (fields != d) throw DomainError("points CSV: ragged row");
  }
  return PointConfiguration(d, side, std::move(coords), index_radius);
}

namespace {

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "binary point format assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw DomainError("points binary: truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void write_points_binary(const PointConfiguration& config, std::ostream& out) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(config.dim()));
  put_le<std::uint64_t>(out, config.size());
  put_le<double>(out, config.side());
  for (double x : config.coordinates()) put_le<double>(out, x);
}

PointConfiguration read_points_binary(std::istream& in, double index_radius) {
  const auto d = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  const auto side = get_le<double>(in);
  if (d < 1 || d > static_cast<std::uint32_t>(kMaxDimension)) {
    throw DomainError("points binary: bad dimension");
  }
  std::vector<double> coords(count * d);
  for (double& x : coords) x = get_le<double>(in);
  return PointConfiguration(static_cast<int>(d), side, std::move(coords),
                            index_radius);
}

}  // namespace covstein
