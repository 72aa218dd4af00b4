#pragma once

#include <stdexcept>
#include <string>

namespace spreadchan {

enum class ErrorKind {
    invalid_dimension,
    domain,
    shape,
    numeric,
    truncation,
    quadrature,
    degenerate_family,
    parse,
    ambiguity,
};

const char *to_string(ErrorKind kind);

/// Every failure raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message);

    ErrorKind kind() const noexcept {
        return kind_;
    }

  private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string &message);

}  // namespace spreadchan
