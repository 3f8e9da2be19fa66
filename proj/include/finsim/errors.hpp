#pragma once

#include <stdexcept>
#include <string>

namespace finsim {

// Error categories map onto CLI exit codes: config 1, simulation 2, io 3.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mechanism cannot reach the commanded configuration (arcsin domain).
class UnreachableConfiguration : public SimulationError {
 public:
  explicit UnreachableConfiguration(const std::string& msg) : SimulationError(msg) {}
};

// Rod normal to the reel crank: no torque can be transmitted.
class TransmissionSingularity : public SimulationError {
 public:
  explicit TransmissionSingularity(const std::string& msg) : SimulationError(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace finsim
