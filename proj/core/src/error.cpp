#include "ctxpath/error.hpp"

#include <algorithm>

namespace ctxpath {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnknownColorSpace: return "UnknownColorSpace";
        case ErrorCode::PatchTooLarge: return "PatchTooLarge";
        case ErrorCode::OutOfGrid: return "OutOfGrid";
        case ErrorCode::BlockTooLarge: return "BlockTooLarge";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::SingleClassData: return "SingleClassData";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::ManifestSchema: return "ManifestSchema";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MissingRecord: return "MissingRecord";
        case ErrorCode::DegenerateData: return "DegenerateData";
    }
    return "Unknown";
}

std::string_view to_string(WarningCode code) noexcept {
    switch (code) {
        case WarningCode::DegenerateChannel: return "DegenerateChannel";
        case WarningCode::DegenerateData: return "DegenerateData";
        case WarningCode::NonConvergence: return "NonConvergence";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void Diagnostics::warn(WarningCode code, std::string message) {
    warnings_.push_back({code, std::move(message)});
}

void Diagnostics::merge(const Diagnostics& other) {
    warnings_.insert(warnings_.end(), other.warnings_.begin(), other.warnings_.end());
}

bool Diagnostics::has(WarningCode code) const noexcept {
    return std::any_of(warnings_.begin(), warnings_.end(),
                       [code](const Warning& w) { return w.code == code; });
}

}  // namespace ctxpath
