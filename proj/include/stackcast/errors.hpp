#pragma once

#include <stdexcept>
#include <string>

namespace stackcast {

enum class ErrorKind {
    // data loading / splitting
    MissingColumn,
    UnparseableRow,
    NonMonotonicDates,
    EmptyFile,
    BoundaryOutOfRange,
    EmptySeries,
    // indicators / feature matrix
    WindowTooLarge,
    SeriesTooShort,
    DuplicateColumnName,
    // preprocessing
    EmptyMatrix,
    ColumnMismatch,
    // learners / selection
    TooFewRows,
    TooFewFeatures,
    NonFiniteInput,
    // evaluation
    LengthMismatch,
    ZeroActualForMape,
    ConstantActualForR2,
    // orchestration
    ConfigError,
    StageError,
    IoError,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the whole library; `kind()` identifies the
/// contract violation and `line()` carries a 1-based row number where that
/// makes sense (UnparseableRow), otherwise 0.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message, long line = 0)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind),
          line_(line) {}

    ErrorKind kind() const noexcept { return kind_; }
    long line() const noexcept { return line_; }

private:
    ErrorKind kind_;
    long line_;
};

} // namespace stackcast
