#ifndef FAIRTUNE_ERROR_HPP
#define FAIRTUNE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fairtune {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad configuration or input data (bounds, pools, config files).
struct ConfigError : Error {
    using Error::Error;
};

/// Evaluator process/socket unreachable or closed.
struct EvaluatorUnavailable : Error {
    using Error::Error;
};

/// Evaluator replied with something that is not a valid protocol message.
struct ProtocolError : Error {
    using Error::Error;
};

struct Timeout : Error {
    using Error::Error;
};

}  // namespace fairtune

#endif
