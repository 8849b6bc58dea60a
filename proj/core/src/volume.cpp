#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "covstein/errors.hpp"
#include "covstein/rng.hpp"
#include "covstein/simulate.hpp"

namespace covstein {

namespace {

struct Vec2 {
  double x;
  double y;
};

Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

constexpr double kCoincident = 1e-12;

// Keeps the part of a convex polygon with p . q <= |q|^2 / 2, i.e. the side
// of the bisector of 0 and q that contains the origin.
std::vector<Vec2> clip_bisector(const std::vector<Vec2>& poly, Vec2 q) {
  const double limit = 0.5 * dot(q, q);
  std::vector<Vec2> out;
  out.reserve(poly.size() + 1);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double fa = dot(a, q) - limit;
    const double fb = dot(b, q) - limit;
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      out.push_back(a + (fa / (fa - fb)) * (b - a));
    }
  }
  return out;
}

// Signed area of the intersection of the disk |p| <= r with triangle (0,a,b).
double disk_triangle_area(Vec2 a, Vec2 b, double r) {
  const double r2 = r * r;
  const Vec2 dir = b - a;
  const double qa = dot(dir, dir);
  if (qa == 0.0) return 0.0;

  // The chord of the disk along the edge is t in (lo, hi); a tangent or
  // missing chord leaves the whole edge outside.
  const double qb = 2.0 * dot(a, dir);
  const double qc = dot(a, a) - r2;
  const double disc = qb * qb - 4.0 * qa * qc;
  double lo = 1.0;
  double hi = 0.0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    lo = std::clamp((-qb - s) / (2.0 * qa), 0.0, 1.0);
    hi = std::clamp((-qb + s) / (2.0 * qa), 0.0, 1.0);
  }
  auto sector = [r2](Vec2 p, Vec2 q) { return 0.5 * r2 * std::atan2(cross(p, q), dot(p, q)); };

  if (lo >= hi) return sector(a, b);
  const Vec2 p = a + lo * dir;
  const Vec2 q = a + hi * dir;
  double area = 0.5 * cross(p, q);
  if (lo > 0.0) area += sector(a, p);
  if (hi < 1.0) area += sector(q, b);
  return area;
}

}  // namespace

namespace detail {

double union_length_on_circle(std::vector<double> centers, double rho,
                              double circumference) {
  if (centers.empty()) return 0.0;
  const double width = 2.0 * rho;
  for (double& c : centers) c = wrap_coordinate(c - rho, circumference);
  std::sort(centers.begin(), centers.end());

  const double first = centers.front();
  double reach = first + width;
  double gaps = 0.0;
  for (std::size_t i = 1; i < centers.size(); ++i) {
    if (centers[i] > reach) gaps += centers[i] - reach;
    reach = std::max(reach, centers[i] + width);
  }
  gaps += std::max(0.0, first + circumference - reach);
  return std::max(0.0, circumference - gaps);
}

double disk_union_area_2d(const PointConfiguration& config, double rho) {
  const double side = config.side();
  const double reach = 2.0 * rho;
  const double reach2 = reach * reach;
  double total = 0.0;

  std::vector<Vec2> images;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto ci = config.point(i);
    images.clear();
    bool shadowed = false;
    config.visit_within(ci, reach, [&](std::size_t j, double) {
      if (j == i) return true;
      std::array<double, 2> disp{};
      toroidal_displacement(ci, config.point(j), side, disp);
      for (int sx = -1; sx <= 1; ++sx) {
        for (int sy = -1; sy <= 1; ++sy) {
          const Vec2 q{disp[0] + sx * side, disp[1] + sy * side};
          const double q2 = dot(q, q);
          if (q2 > reach2) continue;
          if (q2 < kCoincident * kCoincident) {
            // Coincident centers: the lowest index owns the disk.
            if (j < i) shadowed = true;
            continue;
          }
          images.push_back(q);
        }
      }
      return !shadowed;
    });
    if (shadowed) continue;

    std::vector<Vec2> cell{{-rho, -rho}, {rho, -rho}, {rho, rho}, {-rho, rho}};
    for (const Vec2& q : images) {
      cell = clip_bisector(cell, q);
      if (cell.size() < 3) break;
    }
    double area = 0.0;
    for (std::size_t k = 0; k < cell.size() && cell.size() >= 3; ++k) {
      area += disk_triangle_area(cell[k], cell[(k + 1) % cell.size()], rho);
    }
    total += std::max(0.0, area);
  }
  return total;
}

VolumeEstimate monte_carlo_volume(const PointConfiguration& config, double rho,
                                  std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("monte-carlo volume needs mc_samples > 0");
  const int d = config.dim();
  const double side = config.side();
  const double volume = std::pow(side, d);
  CounterRng rng(seed);
  std::array<double, kMaxDimension> x{};
  const std::span<const double> probe(x.data(), static_cast<std::size_t>(d));
  const double stratum = side / static_cast<double>(samples);

  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    x[0] = wrap_coordinate(stratum * (static_cast<double>(s) + rng.uniform01()), side);
    for (int a = 1; a < d; ++a) {
      x[static_cast<std::size_t>(a)] = wrap_coordinate(side * rng.uniform01(), side);
    }
    const bool covered =
        !config.visit_within(probe, rho, [](std::size_t, double) { return false; });
    hits += covered ? 1 : 0;
  }
  const double N = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / N;
  // Laplace-smoothed binomial variance so an all-hit or all-miss run still
  // reports a positive error.
  const double ps = (static_cast<double>(hits) + 1.0) / (N + 2.0);
  return {volume * p, volume * std::sqrt(ps * (1.0 - ps) / N)};
}

}  // namespace detail

VolumeMethod VolumeMethod::automatic(int d) {
  if (d == 1) return exact_1d();
  if (d == 2) return exact_2d();
  return monte_carlo(1'000'000);
}

void VolumeMethod::validate(int d) const {
  switch (mode) {
    case VolumeMode::exact_1d:
      if (d != 1) throw DomainError("exact-1d volume requires d = 1");
      break;
    case VolumeMode::exact_2d:
      if (d != 2) throw DomainError("exact-2d volume requires d = 2");
      break;
    case VolumeMode::monte_carlo:
      if (mc_samples == 0) throw DomainError("monte-carlo volume needs mc_samples > 0");
      break;
  }
}

VolumeEstimate covered_volume(const PointConfiguration& config, double rho,
                              const VolumeMethod& method) {
  method.validate(config.dim());
  if (!(rho > 0.0)) throw DomainError("rho must be > 0");
  if (method.mode == VolumeMode::monte_carlo) {
    return detail::monte_carlo_volume(config, rho, method.mc_samples,
                                      method.mc_seed);
  }
  if (!(2.0 * rho < config.side())) {
    throw DomainError("exact volume modes require 2*rho < side");
  }
  if (method.mode == VolumeMode::exact_1d) {
    return {detail::union_length_on_circle(config.coordinates(), rho, config.side()),
            0.0};
  }
  if (rho > config.index_radius() * (1.0 + 1e-12)) {
    throw DomainError("exact-2d volume requires rho <= the index radius");
  }
  const double area = detail::disk_union_area_2d(config, rho);
  if (method.self_check) {
    const auto mc = detail::monte_carlo_volume(config, rho, 100'000,
                                               derive_seed(method.mc_seed, 0x2d));
    if (std::abs(mc.value - area) > 6.0 * mc.std_error) {
      throw NumericalError("exact-2d area failed its Monte Carlo cross-check",
                           std::abs(mc.value - area));
    }
  }
  return {area, 0.0};
}

}  // namespace covstein
