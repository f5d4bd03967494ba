#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rhosi {

using cd = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

// Error hierarchy. Every failure the library reports derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ArgumentError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  SchemaError(const std::string& msg, int line, std::string key)
      : Error(msg), line(line), key(std::move(key)) {}
  int line;
  std::string key;
};
struct ValidationError : Error {
  ValidationError(const std::string& msg, std::string field)
      : Error(msg), field(std::move(field)) {}
  std::string field;
};
struct GeometryError : Error {
  using Error::Error;
};
struct InfeasibleError : Error {
  InfeasibleError(const std::string& msg, std::string family)
      : Error(msg), family(std::move(family)) {}
  std::string family;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace rhosi
