#include "tdp/csv.hpp"

#include <charconv>
#include <cmath>

namespace tdp::csv {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

double parse_double(std::string_view field, std::size_t line, std::string_view column) {
    double value = 0.0;
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), last, value);
    if (field.empty() || ec != std::errc{} || ptr != last)
        throw ParseError(line, "column " + std::string(column) + ": invalid number '" +
                                   std::string(field) + "'");
    return value;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line, std::string_view column) {
    std::uint64_t value = 0;
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), last, value);
    if (field.empty() || ec != std::errc{} || ptr != last)
        throw ParseError(line, "column " + std::string(column) + ": invalid integer '" +
                                   std::string(field) + "'");
    return value;
}

std::string_view chomp(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

}  // namespace tdp::csv
