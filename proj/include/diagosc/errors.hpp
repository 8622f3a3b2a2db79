#ifndef DIAGOSC_ERRORS_HPP
#define DIAGOSC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace diagosc {

/// Vector or matrix sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Input frequency lies inside the locking interval, where the period integral diverges.
class LockedRegimeError : public std::domain_error {
 public:
  explicit LockedRegimeError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical kernel failed to converge or to make progress.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require_same_size(long expected, long actual, const char* what) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": expected size " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace diagosc

#endif  // DIAGOSC_ERRORS_HPP
