#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include "barytrack/error.hpp"

namespace barytrack {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDegenerateMeanTolerance = 1e-9;
inline constexpr double kSlerpLinearThreshold = 1e-9;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// A point on S^2. Construction renormalizes, so the norm is 1 up to rounding.
class UnitVector {
 public:
  UnitVector() : x_(1.0), y_(0.0), z_(0.0) {}

  UnitVector(double x, double y, double z) {
    const double n = std::sqrt(x * x + y * y + z * z);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorKind::DomainError, "cannot normalize a zero or non-finite vector");
    }
    x_ = x / n;
    y_ = y / n;
    z_ = z / n;
  }

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  double dot(const UnitVector& o) const { return x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }

  double cross_norm(const UnitVector& o) const {
    const double cx = y_ * o.z_ - z_ * o.y_;
    const double cy = z_ * o.x_ - x_ * o.z_;
    const double cz = x_ * o.y_ - y_ * o.x_;
    return std::sqrt(cx * cx + cy * cy + cz * cz);
  }

  bool operator==(const UnitVector&) const = default;

 private:
  double x_, y_, z_;
};

struct LatLon {
  double lat;  // degrees
  double lon;  // degrees, (-180, 180]
};

inline UnitVector from_latlon(double lat_deg, double lon_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
    throw Error(ErrorKind::DomainError, "latitude out of [-90, 90]");
  }
  const double lat = deg_to_rad(lat_deg);
  const double lon = deg_to_rad(lon_deg);
  return UnitVector(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
}

inline LatLon to_latlon(const UnitVector& v) {
  const double lat = rad_to_deg(std::atan2(v.z(), std::hypot(v.x(), v.y())));
  double lon = rad_to_deg(std::atan2(v.y(), v.x()));
  if (lon <= -180.0) lon += 360.0;
  return {lat, lon};
}

/// 1 - <a, b>, i.e. 1 - cos(dist(a, b)). Lies in [0, 2].
inline double cosine_energy(const UnitVector& a, const UnitVector& b) {
  const double e = 1.0 - a.dot(b);
  return e < 0.0 ? 0.0 : (e > 2.0 ? 2.0 : e);
}

/// Great-circle distance in radians, via atan2 for accuracy near 0 and pi.
inline double gc_distance(const UnitVector& a, const UnitVector& b) {
  return std::atan2(a.cross_norm(b), a.dot(b));
}

inline double gc_distance_km(const UnitVector& a, const UnitVector& b) {
  return kEarthRadiusKm * gc_distance(a, b);
}

/// Constant-speed interpolation along the minor arc from a (t = 0) to b (t = 1).
inline UnitVector slerp(const UnitVector& a, const UnitVector& b, double t) {
  const double angle = gc_distance(a, b);
  if (angle < kSlerpLinearThreshold) {
    return UnitVector(a.x() + t * (b.x() - a.x()), a.y() + t * (b.y() - a.y()),
                      a.z() + t * (b.z() - a.z()));
  }
  if (std::numbers::pi - angle < kSlerpLinearThreshold) {
    throw Error(ErrorKind::AntipodalError, "slerp between antipodal points is undefined");
  }
  const double s = std::sin(angle);
  const double wa = std::sin((1.0 - t) * angle) / s;
  const double wb = std::sin(t * angle) / s;
  return UnitVector(wa * a.x() + wb * b.x(), wa * a.y() + wb * b.y(), wa * a.z() + wb * b.z());
}

struct WeightedPoint {
  UnitVector point;
  double weight = 1.0;
};

namespace detail {

template <typename Range, typename PointOf, typename WeightOf>
UnitVector cosine_barycentre_impl(const Range& items, PointOf point_of, WeightOf weight_of) {
  double sx = 0.0, sy = 0.0, sz = 0.0, total = 0.0;
  for (const auto& item : items) {
    const double w = weight_of(item);
    if (!(w >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative barycentre weight");
    const UnitVector& p = point_of(item);
    sx += w * p.x();
    sy += w * p.y();
    sz += w * p.z();
    total += w;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "barycentre weights must sum to a positive value");
  }
  sx /= total;
  sy /= total;
  sz /= total;
  if (std::sqrt(sx * sx + sy * sy + sz * sz) < kDegenerateMeanTolerance) {
    throw Error(ErrorKind::DegenerateMean, "mean direction undefined (Euclidean mean is ~0)");
  }
  return UnitVector(sx, sy, sz);
}

}  // namespace detail

/// Minimizer of the weighted mean cosine energy: the normalized Euclidean mean.
inline UnitVector cosine_barycentre(std::span<const WeightedPoint> points) {
  return detail::cosine_barycentre_impl(
      points, [](const WeightedPoint& p) -> const UnitVector& { return p.point; },
      [](const WeightedPoint& p) { return p.weight; });
}

/// Equal-weight overload.
inline UnitVector cosine_barycentre(std::span<const UnitVector> points) {
  return detail::cosine_barycentre_impl(
      points, [](const UnitVector& p) -> const UnitVector& { return p; },
      [](const UnitVector&) { return 1.0; });
}

}  // namespace barytrack
