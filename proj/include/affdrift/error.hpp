#pragma once

#include <stdexcept>
#include <string>

namespace affdrift {

enum class ErrorKind {
  kParse,
  kValidation,
  kMissingInput,
  kEmptyDataset,
  kPrecondition,
};

// Single exception type for the library; `kind` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace affdrift
