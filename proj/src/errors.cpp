#include "stackcast/errors.hpp"

namespace stackcast {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::UnparseableRow: return "UnparseableRow";
        case ErrorKind::NonMonotonicDates: return "NonMonotonicDates";
        case ErrorKind::EmptyFile: return "EmptyFile";
        case ErrorKind::BoundaryOutOfRange: return "BoundaryOutOfRange";
        case ErrorKind::EmptySeries: return "EmptySeries";
        case ErrorKind::WindowTooLarge: return "WindowTooLarge";
        case ErrorKind::SeriesTooShort: return "SeriesTooShort";
        case ErrorKind::DuplicateColumnName: return "DuplicateColumnName";
        case ErrorKind::EmptyMatrix: return "EmptyMatrix";
        case ErrorKind::ColumnMismatch: return "ColumnMismatch";
        case ErrorKind::TooFewRows: return "TooFewRows";
        case ErrorKind::TooFewFeatures: return "TooFewFeatures";
        case ErrorKind::NonFiniteInput: return "NonFiniteInput";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::ZeroActualForMape: return "ZeroActualForMape";
        case ErrorKind::ConstantActualForR2: return "ConstantActualForR2";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::StageError: return "StageError";
        case ErrorKind::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace stackcast
