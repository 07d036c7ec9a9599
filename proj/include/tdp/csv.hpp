#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tdp::csv {

/// Malformed input; the message names the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Splits on commas. Fields are plain tokens; quoting is not supported.
std::vector<std::string_view> split(std::string_view line);

double parse_double(std::string_view field, std::size_t line, std::string_view column);
std::uint64_t parse_uint(std::string_view field, std::size_t line, std::string_view column);

/// Strips a trailing '\r' so files written on other platforms still parse.
std::string_view chomp(std::string_view line);

}  // namespace tdp::csv
