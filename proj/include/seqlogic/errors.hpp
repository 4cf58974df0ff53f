#pragma once

#include <stdexcept>
#include <string>

namespace seqlogic {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax error; `position` is the byte offset where parsing stopped.
struct ParseError : Error {
  std::size_t position;
  ParseError(const std::string& message, std::size_t pos)
      : Error(message + " at position " + std::to_string(pos)), position(pos) {}
};

/// Raised when a register scheduled for discard is still entangled with the
/// rest of the state. `defect` is 1 - (largest eigenvalue of the register's
/// reduced density matrix), zero for an unentangled pure register.
struct EntangledDiscardError : Error {
  double defect;
  EntangledDiscardError(const std::string& message, double d)
      : Error(message + " (entanglement defect " + std::to_string(d) + ")"), defect(d) {}
};

/// Raised when a forced measurement outcome has probability below the branch
/// pruning threshold.
struct ImpossibleBranchError : Error {
  using Error::Error;
};

/// Raised by run_until_success when the attempt cap is reached.
struct ExhaustedAttemptsError : Error {
  std::size_t attempts;
  double failure_rate;
  ExhaustedAttemptsError(std::size_t n, double rate)
      : Error("no successful run in " + std::to_string(n) +
              " attempts (empirical failure rate " + std::to_string(rate) + ")"),
        attempts(n),
        failure_rate(rate) {}
};

}  // namespace seqlogic
