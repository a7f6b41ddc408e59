#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fraudlab {

enum class Errc {
  kConfig,
  kSchema,
  kRow,
  kIo,
  kUndefinedRate,
  kInsufficientData,
  kStratification,
  kResample,
  kImpurity,
  kFit,
  kShape,
  kPersistence,
  kMetric,
  kWeight,
  kSearch,
};

std::string_view errc_name(Errc code);

// Single exception type for the library; `code()` tells callers which
// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Process exit status for an error category: 2 config, 3 data, 4 fit.
int exit_code_for(Errc code);

}  // namespace fraudlab
