/*
   Copyright 2026 The warptube Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace warptube {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the admissible range of a profile or operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Derivative order beyond what a profile can supply.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class RootNotFound : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature failed to reach tolerance on a finite interval.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// An integrand or derived quantity evaluated to NaN or infinity.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// The level-set chart s -> F(s, r) is not monotone here (C <= 0).
class DegenerateChart : public Error {
 public:
  using Error::Error;
};

/// A calibrated constant exceeded its admissible bound.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// A simulated path produced a non-finite state.
class SimulationFault : public Error {
 public:
  SimulationFault(const std::string& what, long long path_index, double time)
      : Error(what + " (path " + std::to_string(path_index) + ", t = " +
              std::to_string(time) + ")"),
        path_index_(path_index),
        time_(time) {}

  long long path_index() const noexcept { return path_index_; }
  double time() const noexcept { return time_; }

 private:
  long long path_index_;
  double time_;
};

/// Every simulated path was censored, so no estimate exists.
class InconclusiveStatistics : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. Carries a line number when one is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace warptube
