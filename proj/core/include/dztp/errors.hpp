#pragma once

#include <stdexcept>
#include <string>

namespace dztp {

/// Argument outside the mathematical domain of the requested quantity.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A truncated series or search ran out of its term budget before its
/// tail bound was certified.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// An enumeration oracle was asked for a size beyond its cap.
class CombinatorialLimitError : public std::length_error {
public:
    explicit CombinatorialLimitError(const std::string& what) : std::length_error(what) {}
};

}  // namespace dztp
