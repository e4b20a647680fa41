#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pm2s {

// Bad input data (malformed files, out-of-range values, missing paths).
// The CLI maps this to exit code 1; everything else is an internal error (2).
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input error with a byte offset into the offending stream.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : InputError(msg + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_ = 0;
};

} // namespace pm2s
