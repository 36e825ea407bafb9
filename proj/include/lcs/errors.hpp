#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace lcs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the space-time bounding box of a gridded field.
class OutOfBounds : public Error {
 public:
  OutOfBounds(std::string axis, double value)
      : Error("query outside grid along axis '" + axis + "' (" + std::to_string(value) + ")"),
        axis_(std::move(axis)),
        value_(value) {}
  const std::string& axis() const { return axis_; }
  double value() const { return value_; }

 private:
  std::string axis_;
  double value_;
};

/// A trajectory left the region where velocity data is valid.
class LeftDomain : public Error {
 public:
  LeftDomain(double t_exit, Eigen::Vector2d position)
      : Error("trajectory left the velocity domain at t=" + std::to_string(t_exit)),
        t_exit_(t_exit),
        position_(position) {}
  double exit_time() const { return t_exit_; }
  const Eigen::Vector2d& position() const { return position_; }

 private:
  double t_exit_;
  Eigen::Vector2d position_;
};

class DegenerateLatitude : public Error {
 public:
  explicit DegenerateLatitude(double lat_deg)
      : Error("Coriolis factor below floor at latitude " + std::to_string(lat_deg)), lat_(lat_deg) {}
  double latitude() const { return lat_; }

 private:
  double lat_;
};

class InvalidPoint : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class RadiusTooLarge : public Error {
 public:
  using Error::Error;
};

class CriticalPointOnCurve : public Error {
 public:
  using Error::Error;
};

class DegeneratePointOnCurve : public Error {
 public:
  using Error::Error;
};

class UndersampledCurve : public Error {
 public:
  using Error::Error;
};

class InvalidPolygon : public Error {
 public:
  using Error::Error;
};

/// eta_direction called with lambda^2 outside [lambda1, lambda2].
class OutsideDomain : public Error {
 public:
  using Error::Error;
};

class DegenerateTensor : public Error {
 public:
  using Error::Error;
};

class SectionLeavesDomain : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class MissingLayer : public Error {
 public:
  using Error::Error;
};

}  // namespace lcs
