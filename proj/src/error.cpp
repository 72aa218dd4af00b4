#include "spreadchan/error.hpp"

namespace spreadchan {

const char *to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_dimension:
            return "invalid dimension";
        case ErrorKind::domain:
            return "domain error";
        case ErrorKind::shape:
            return "shape error";
        case ErrorKind::numeric:
            return "numeric error";
        case ErrorKind::truncation:
            return "truncation error";
        case ErrorKind::quadrature:
            return "quadrature error";
        case ErrorKind::degenerate_family:
            return "degenerate family";
        case ErrorKind::parse:
            return "parse error";
        case ErrorKind::ambiguity:
            return "ambiguous estimate";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string &message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {
}

void fail(ErrorKind kind, const std::string &message) {
    throw Error(kind, message);
}

}  // namespace spreadchan
