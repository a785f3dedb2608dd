#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace momkde {

enum class ErrorCode
{
  domain,        // argument outside the mathematical domain
  shape,         // dimension / length mismatch
  parameter,     // invalid hyperparameter or precondition
  numeric,       // NaN, PSD violation, non-finite intermediate
  empty_model,   // estimator fitted on zero points
  normalization, // non-positive or non-finite normalizing constant
  degenerate_fit,
  metric,
  ingestion,
  schema,
  protocol,
  selection,
  io
};

std::string_view to_string(ErrorCode code);

//! Single exception type for the library; `code()` tells the failure class.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what)
    , code_(code)
  {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
  throw Error(code, what);
}

} // namespace momkde
