#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polydg {

using Index = int;
using Point2 = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class SpaceError : public Error {
 public:
  using Error::Error;
};

class ProblemDataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class LinearSolveError : public Error {
 public:
  using Error::Error;
};

}  // namespace polydg
