// Error taxonomy shared by the library and the CLI exit-code mapping.
#pragma once

#include <stdexcept>
#include <string>

namespace pcf {

// Each category maps to a distinct nonzero process exit code in the CLI.
enum class ErrorCode : int {
  ok = 0,
  usage = 64,       // bad flags / missing required arguments
  validation = 65,  // parameter outside a documented precondition
  capacity = 66,    // requested size exceeds a hard cap (memory, state space)
  numeric = 67,     // quadrature or solver failed to converge
  bracket = 68,     // root bracket does not straddle the target
  contract = 69,    // mismatched sizes between coupled inputs
  io = 74,          // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error(ErrorCode::usage, w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error(ErrorCode::validation, w) {}
};
struct CapacityError : Error {
  explicit CapacityError(const std::string& w) : Error(ErrorCode::capacity, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorCode::numeric, w) {}
};
struct BracketError : Error {
  explicit BracketError(const std::string& w) : Error(ErrorCode::bracket, w) {}
};
struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error(ErrorCode::contract, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};

}  // namespace pcf
