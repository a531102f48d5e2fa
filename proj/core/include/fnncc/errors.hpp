#pragma once

#include <stdexcept>
#include <string>

namespace fnncc {

// Stable error categories. The CLI maps these to distinct exit codes and
// machine-readable error records, so additions go at the end.
enum class ErrorCode {
  config = 1,
  data = 2,
  schema = 3,
  ill_posed_fit = 4,
  degenerate_data = 5,
  rank_deficient = 6,
  numeric = 7,
  training_diverged = 8,
  quantile_undefined = 9,
  parse = 10,
  version_mismatch = 11,
  io = 12,
  internal = 13,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fnncc
