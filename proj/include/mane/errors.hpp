#pragma once

#include <stdexcept>
#include <string>

namespace mane {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind {
  Config,      // bad parameters or options
  Data,        // unreadable, malformed or inconsistent input
  Numeric,     // divergence or failed fit
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define MANE_DEFINE_ERROR(Name, Kind)                                         \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}  \
  };

MANE_DEFINE_ERROR(ParameterError, Config)
MANE_DEFINE_ERROR(CapacityError, Config)
MANE_DEFINE_ERROR(IndexError, Config)
MANE_DEFINE_ERROR(UnsupportedDimensionError, Config)
MANE_DEFINE_ERROR(FormatError, Data)
MANE_DEFINE_ERROR(ConsistencyError, Data)
MANE_DEFINE_ERROR(IoError, Data)
MANE_DEFINE_ERROR(ParseError, Data)
MANE_DEFINE_ERROR(ShapeError, Data)
MANE_DEFINE_ERROR(DegenerateInputError, Data)
MANE_DEFINE_ERROR(ScheduleError, Data)
MANE_DEFINE_ERROR(DomainError, Numeric)
MANE_DEFINE_ERROR(FitError, Numeric)

#undef MANE_DEFINE_ERROR

/// Non-finite coordinate found during optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(ErrorKind::Numeric, what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace mane
