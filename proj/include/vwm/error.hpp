#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vwm {

/// Base of every error raised by the library. Each subclass maps to one
/// CLI exit code (see `exit_code_for`).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array shapes disagree or violate a size precondition.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Input lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class TruncationError : public FormatError {
public:
    TruncationError(std::size_t frame_index, const std::string& what)
        : FormatError(what), frame_index_(frame_index) {}
    std::size_t frame_index() const noexcept { return frame_index_; }

private:
    std::size_t frame_index_;
};

/// Watermark does not fit the blocks it was given.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A frame has fewer motion blocks than the watermark needs.
class InsufficientMotion : public CapacityError {
public:
    InsufficientMotion(std::size_t available, std::size_t required)
        : CapacityError("insufficient motion: " + std::to_string(available) +
                        " motion blocks available, " + std::to_string(required) + " required"),
          available_(available),
          required_(required) {}
    std::size_t available() const noexcept { return available_; }
    std::size_t required() const noexcept { return required_; }

private:
    std::size_t available_;
    std::size_t required_;
};

/// No frame of a sequence could carry the watermark.
class NoCapacity : public CapacityError {
public:
    using CapacityError::CapacityError;
};

/// A manifest does not describe the sequences it is applied to.
class IntegrityError : public Error {
public:
    using Error::Error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int capacity = 3;
inline constexpr int io = 4;
}  // namespace exit_code

inline int exit_code_for(const Error& e) noexcept {
    if (dynamic_cast<const CapacityError*>(&e)) return exit_code::capacity;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const IntegrityError*>(&e))
        return exit_code::io;
    return exit_code::config;
}

}  // namespace vwm
