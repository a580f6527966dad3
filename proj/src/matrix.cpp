#include "eofair/matrix.hpp"

#include <algorithm>

#include "eofair/error.hpp"

namespace eofair {

std::string_view to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::internal: return "internal";
    case ErrorCategory::config: return "config";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::io: return "io";
    case ErrorCategory::unsupported: return "unsupported";
  }
  return "internal";
}

Matrix Matrix::gather_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace eofair
