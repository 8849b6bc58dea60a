#pragma once

// Torus geometry: model parameters, points on the torus [0, side)^d, the
// toroidal metric and a uniform-grid spatial index for radius queries.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace covstein {

inline constexpr int kMaxDimension = 8;
inline constexpr int kDefaultMaxDimension = 5;

/// Which closed-form results apply to a parameter triple.
struct Validity {
  bool mean_formulas = false;      // 2 rho < side
  bool variance_formulas = false;  // 4 rho < side
  bool theorem_V = false;          // n > 6^d phi
  bool theorem_S = false;          // n > max(3^d, 2^(d+1) + 1) phi

  friend bool operator==(const Validity&, const Validity&) = default;
};

/// The triple (d, n, rho): n uniform points on the torus of volume n.
class ModelParams {
 public:
  /// Requires d >= 1, n >= 4, rho > 0 finite; d <= kDefaultMaxDimension
  /// unless allow_high_dimension (then d <= kMaxDimension).
  ModelParams(int d, std::int64_t n, double rho,
              bool allow_high_dimension = false);

  int dim() const noexcept { return d_; }
  std::int64_t n() const noexcept { return n_; }
  double rho() const noexcept { return rho_; }
  double side() const noexcept { return side_; }
  double phi() const noexcept { return phi_; }
  const Validity& validity() const noexcept { return validity_; }

  // Each throws ValidityError naming the inequality when it fails.
  void require_mean_formulas() const;
  void require_variance_formulas() const;
  void require_theorem_V() const;
  void require_theorem_S() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.rho_ == b.rho_;
  }

 private:
  int d_;
  std::int64_t n_;
  double rho_;
  double side_;
  double phi_;
  Validity validity_;
};

/// A point of the torus; coordinates live in [0, side).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::span<const double> coords);
  TorusPoint(std::initializer_list<double> coords);

  int dim() const noexcept { return dim_; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  /// Throws DomainError unless every coordinate lies in [0, side).
  void check_inside(double side) const;

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a[i] != b[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDimension> c_{};
  int dim_ = 0;
};

/// Reduces x into [0, side).
double wrap_coordinate(double x, double side) noexcept;

/// Squared toroidal distance between two coordinate vectors of equal length.
double toroidal_distance2(std::span<const double> x, std::span<const double> y,
                          double side) noexcept;

/// Euclidean toroidal distance; throws DomainError on dimension mismatch.
double toroidal_distance(const TorusPoint& x, const TorusPoint& y, double side);

/// Minimum-image displacement y - x, each component in [-side/2, side/2].
void toroidal_displacement(std::span<const double> x, std::span<const double> y,
                           double side, std::span<double> out) noexcept;

/// n points on the torus plus a cell grid for radius queries.
///
/// The grid edge is side / k with k = floor(side / index_radius) capped so
/// the number of cells stays O(n); the edge is therefore always at least
/// index_radius, and queries up to 3 * index_radius are supported.
class PointConfiguration {
 public:
  /// `coords` holds size*dim values, point i at [i*dim, (i+1)*dim).
  PointConfiguration(int dim, double side, std::vector<double> coords,
                     double index_radius);

  int dim() const noexcept { return dim_; }
  double side() const noexcept { return side_; }
  std::size_t size() const noexcept { return count_; }
  double index_radius() const noexcept { return index_radius_; }
  double supported_radius() const noexcept { return 3.0 * index_radius_; }
  double cell_edge() const noexcept { return cell_edge_; }
  int cells_per_axis() const noexcept { return cells_per_axis_; }

  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  TorusPoint point_at(std::size_t i) const { return TorusPoint(point(i)); }
  const std::vector<double>& coordinates() const noexcept { return coords_; }

  /// Ids with toroidal distance <= r from center, ascending. Throws
  /// DomainError when r exceeds supported_radius() or r < 0.
  std::vector<std::size_t> neighbors_within(const TorusPoint& center,
                                            double r) const;

  /// Calls f(id, squared_distance) for every point within closed distance r
  /// of center; stops early when f returns false. Returns false iff stopped.
  template <class F>
  bool visit_within(std::span<const double> center, double r, F&& f) const;

  // Modified copies (the index is rebuilt).
  PointConfiguration with_point_added(const TorusPoint& p) const;
  PointConfiguration with_point_removed(std::size_t i) const;
  PointConfiguration with_point_moved(std::size_t i, const TorusPoint& p) const;
  PointConfiguration translated(const TorusPoint& shift) const;

 private:
  void build_index();
  int cell_of(double x) const noexcept;
  void check_query_radius(double r) const;

  int dim_;
  double side_;
  std::size_t count_;
  std::vector<double> coords_;
  double index_radius_;
  int cells_per_axis_ = 1;
  double cell_edge_ = 0.0;
  std::vector<std::uint32_t> cell_start_;  // CSR offsets, size cells + 1
  std::vector<std::uint32_t> cell_items_;  // point ids grouped by cell
};

/// n i.i.d. uniform points for params, deterministic in seed; index radius rho.
PointConfiguration sample_configuration(const ModelParams& params,
                                        std::uint64_t seed);

// Coordinate dump/load for cross-implementation comparison. CSV: header
// x0,...,x{d-1}, 17 significant digits. Binary: little-endian header
// (uint32 d, uint64 count, float64 side) followed by count*d float64.
void write_points_csv(const PointConfiguration& config, std::ostream& out);
PointConfiguration read_points_csv(std::istream& in, double side,
                                   double index_radius);
void write_points_binary(const PointConfiguration& config, std::ostream& out);
PointConfiguration read_points_binary(std::istream& in, double index_radius);

// ---------------------------------------------------------------------------

template <class F>
bool PointConfiguration::visit_within(std::span<const double> center, double r,
                                      F&& f) const {
  check_query_radius(r);
  const double r2 = r * r;
  const int k = cells_per_axis_;
  const int reach = static_cast<int>(std::ceil(r / cell_edge_));
  const bool full = 2 * reach + 1 >= k;
  const int span_cells = full ? k : 2 * reach + 1;

  std::array<int, kMaxDimension> base{};
  for (int a = 0; a < dim_; ++a) {
    base[static_cast<std::size_t>(a)] =
        full ? 0 : cell_of(center[static_cast<std::size_t>(a)]) - reach;
  }
  std::array<int, kMaxDimension> offset{};
  for (;;) {
    std::size_t cell = 0;
    for (int a = dim_ - 1; a >= 0; --a) {
      int c = base[static_cast<std::size_t>(a)] + offset[static_cast<std::size_t>(a)];
      c %= k;
      if (c < 0) c += k;
      cell = cell * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
    }
    for (std::uint32_t s = cell_start_[cell]; s < cell_start_[cell + 1]; ++s) {
      const std::uint32_t id = cell_items_[s];
      const double dist2 = toroidal_distance2(center, point(id), side_);
      if (dist2 <= r2 && !f(static_cast<std::size_t>(id), dist2)) return false;
    }
    int a = 0;
    while (a < dim_ && ++offset[static_cast<std::size_t>(a)] == span_cells) {
      offset[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == dim_) break;
  }
  return true;
}

}  // namespace covstein
