// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace risgee {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kLn2 = std::numbers::ln2;

/// Malformed arguments: dimension mismatches, zero filters, out-of-domain scalars.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The configuration yields a nonpositive power denominator or similar.
class DegenerateConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expansion point makes a surrogate coefficient blow up (|c_k^H A_k gamma| = 0).
class SurrogateDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleSubproblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a solver stage; `what()` carries the stage annotation.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Configuration file / field validation failure.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double dbw_to_watts(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Real part of the Frobenius inner product <a, b> = Re tr(a^H b). Works for
/// real or complex Eigen vectors and matrices.
template <typename A, typename B>
double inner_real(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a.conjugate().cwiseProduct(b)).real().sum();
}

}  // namespace risgee
