#include "momkde/error.hpp"

namespace momkde {

std::string_view to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::shape: return "shape";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::empty_model: return "empty_model";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::degenerate_fit: return "degenerate_fit";
    case ErrorCode::metric: return "metric";
    case ErrorCode::ingestion: return "ingestion";
    case ErrorCode::schema: return "schema";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::selection: return "selection";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

} // namespace momkde
