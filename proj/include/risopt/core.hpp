// SPDX-License-Identifier: Apache-2.0
//
// risopt - joint precoder / RIS phase-shift optimization library
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace risopt {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kBoltzmann = 1.380649e-23;   // J/K
inline constexpr double kPi = 3.14159265358979323846;

// Base class for every error the library throws. Subclasses carry no extra
// state; the what() string holds the detail.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotHermitian : public Error {
  public:
    using Error::Error;
};
class NotPositiveDefinite : public Error {
  public:
    using Error::Error;
};
class NoConvergence : public Error {
  public:
    using Error::Error;
};
class DimensionMismatch : public Error {
  public:
    using Error::Error;
};
class WrongTopology : public Error {
  public:
    using Error::Error;
};
class CoincidentElements : public Error {
  public:
    using Error::Error;
};
class InvalidRicianFactor : public Error {
  public:
    using Error::Error;
};
class NonmonotoneDetected : public Error {
  public:
    using Error::Error;
};
class ConfigError : public Error {
  public:
    using Error::Error;
};
class ParseError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};
class ValidationError : public ConfigError {
  public:
    using ConfigError::ConfigError;
};

} // namespace risopt
