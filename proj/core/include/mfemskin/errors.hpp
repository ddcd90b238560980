#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mfemskin {

/// Malformed input (mesh, rig, material or force files, CLI options).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parse failure with the offending line number (1-based).
class ParseError : public ConfigError {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Tetrahedra whose volume is too small to invert their rest edge matrix.
class DegenerateElementError : public ConfigError {
public:
    explicit DegenerateElementError(std::vector<int> elements);
    const std::vector<int>& elements() const { return elements_; }

private:
    std::vector<int> elements_;
};

/// Singular or indefinite systems, non-finite solutions.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mfemskin
