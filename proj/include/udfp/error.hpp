#ifndef UDFP_ERROR_HPP
#define UDFP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace udfp {

enum class ErrorCode {
  invalid_alpha,
  invalid_portfolio,
  degenerate_vector,
  dimension_mismatch,
  empty_ensemble,
  series_too_short,
  non_positive_return,
  non_convergence,
  insufficient_history,
  invalid_argument,
  data_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_alpha: return "invalid alpha";
    case ErrorCode::invalid_portfolio: return "invalid portfolio";
    case ErrorCode::degenerate_vector: return "degenerate vector";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::empty_ensemble: return "empty ensemble";
    case ErrorCode::series_too_short: return "series too short";
    case ErrorCode::non_positive_return: return "non-positive return";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::insufficient_history: return "insufficient history";
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::data_error: return "data error";
  }
  return "unknown";
}

/// Base error for everything the library throws on bad input or failed numerics.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Input-file problem; line is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(std::size_t line, const std::string& what)
      : Error(ErrorCode::data_error,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(where) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace detail
}  // namespace udfp

#endif  // UDFP_ERROR_HPP
