#pragma once

#include <stdexcept>
#include <string>

namespace qbe {

/// Configuration could not be parsed (malformed file, unknown experiment).
/// Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A parsed configuration violates a module precondition (e.g. c <= 0).
/// Maps to CLI exit code 3.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// A time integration produced non-finite values. Carries the time and step
/// at which the blow-up was detected. Maps to CLI exit code 4.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, double time, long step)
      : std::runtime_error(what + " (t=" + std::to_string(time) +
                           ", step=" + std::to_string(step) + ")"),
        time_(time),
        step_(step) {}
  double time() const { return time_; }
  long step() const { return step_; }

 private:
  double time_;
  long step_;
};

/// Snapshot file is malformed (bad magic, version or payload size).
class snapshot_error : public std::runtime_error {
 public:
  explicit snapshot_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qbe
