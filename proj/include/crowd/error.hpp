#pragma once

#include <stdexcept>
#include <string>

namespace crowd {

// Base error for every failure raised by the library. Messages are short
// lowercase phrases so callers (and tests) can match on them.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace crowd
