#pragma once

#include <stdexcept>
#include <string>

namespace fgm {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or index mismatch between operands.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Invalid argument values (negative sizes, bad enum strings, out-of-range knobs).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Malformed input files; message carries row/column context where known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Requested more components than the data supports.
class RankError : public Error {
public:
    explicit RankError(const std::string& msg) : Error(msg) {}
};

// Iterative routine failed in a way retries will not fix (bad bracket, NaN input).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// File-system level failures (missing file, unwritable output).
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace fgm
