#ifndef GTRW_ERROR_HPP
#define GTRW_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gtrw {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input: parse errors, domain violations, broken preconditions.
struct InputError : Error {
    using Error::Error;
};

// A configured resource cap was hit (enumeration caps, node budgets,
// evaluator step budgets). `count` is the amount of work done when the
// cap fired, in the unit of the failing operation.
struct CapExceeded : Error {
    std::uint64_t count;
    explicit CapExceeded(const std::string& msg, std::uint64_t count = 0)
        : Error(msg), count(count) {}
};

}  // namespace gtrw

#endif
