#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vfence {

constexpr double kFeetToMeters = 0.3048;
constexpr double kMphToFeetPerSecond = 5280.0 / 3600.0;

inline constexpr double mph_to_fps(double mph) { return mph * kMphToFeetPerSecond; }

/// One ambient-light sensor per road direction.
enum class Channel : std::uint8_t { a = 0, b = 1 };

constexpr int kNumChannels = 2;

inline constexpr int channel_index(Channel c) { return static_cast<int>(c); }

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

/// Raised for precondition violations and malformed domain values.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an input document or CSV cannot be understood. `where()`
/// names the file and the offending location (field path or row number).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string where, const std::string& what)
        : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where))
    {
    }

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

}  // namespace vfence
