#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wki {

enum class ErrorKind {
  InvalidArgument,
  ResolutionExceeded,
  PossibleBoundState,
  RhpUnsolved,
  SlopeConditionViolated,
  HodographUnsolved,
  HodographInconsistent,
  RangeError,
  DiagnosticUnreliable,
  EvolutionDiverged,
  InternalError,
};

std::string_view to_string(ErrorKind kind);

// Regime errors are outcomes of running outside the small-data regime
// (bound states, slope violation, blow-up), as opposed to numerical failures.
bool is_regime_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace wki
