#pragma once

#include <stdexcept>
#include <string>

namespace gtl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes that do not compose (matrix products, clouds of unequal size, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

// Argument outside its allowed range (t outside [0,1], gamma <= 0, ...).
class RangeError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

// Track whose endpoints or segments collapse below the 1e-12 floor.
class DegenerateTrackError : public Error {
public:
    using Error::Error;
};

// A gradient step flipped the ReLU activation pattern.
class PatternInstabilityError : public Error {
public:
    using Error::Error;
};

// Training loss became NaN or infinite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Malformed file (IDX, track file, checkpoint).
class FormatError : public Error {
public:
    using Error::Error;
};

// Configuration failed validation; the message starts with the JSON field path.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace gtl
