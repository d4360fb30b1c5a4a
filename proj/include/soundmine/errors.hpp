#pragma once

#include <stdexcept>
#include <string>

namespace soundmine {

// Archive scanning / timeline errors.
struct EmptyArchiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AmbiguousTimestampError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Parm-file errors carry the 1-based line the problem was found on.
struct ParmSyntaxError : std::runtime_error {
    int line;
    ParmSyntaxError(const std::string& msg, int line_no)
        : std::runtime_error(msg), line(line_no) {}
};

struct ParmDuplicateKeyError : std::runtime_error {
    int line;
    ParmDuplicateKeyError(const std::string& msg, int line_no)
        : std::runtime_error(msg), line(line_no) {}
};

// Audio decode errors.
struct CorruptContainerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Block planning.
struct BadGeometryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// STFT.
struct TooShortError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Selection table parsing.
struct BadHeaderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadRowError : std::runtime_error {
    int line;
    BadRowError(const std::string& msg, int line_no)
        : std::runtime_error(msg), line(line_no) {}
};

// Benchmark arithmetic.
struct ZeroErtError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace soundmine
