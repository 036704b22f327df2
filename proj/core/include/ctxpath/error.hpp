#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctxpath {

enum class ErrorCode {
    InvalidArgument,
    UnknownColorSpace,
    PatchTooLarge,
    OutOfGrid,
    BlockTooLarge,
    DuplicateKey,
    IoFailure,
    BadMagic,
    UnsupportedVersion,
    CorruptRecord,
    InsufficientSamples,
    DimMismatch,
    SingleClassData,
    EmptyDataset,
    ImageTooSmall,
    VersionMismatch,
    SchemaViolation,
    TooFewSamples,
    ManifestSchema,
    ConfigError,
    MissingRecord,
    DegenerateData,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class WarningCode {
    DegenerateChannel,
    DegenerateData,
    NonConvergence,
};

std::string_view to_string(WarningCode code) noexcept;

struct Warning {
    WarningCode code;
    std::string message;
};

// Non-fatal conditions collected by operations that degrade gracefully.
// Passing nullptr wherever a Diagnostics* is accepted discards them.
class Diagnostics {
public:
    void warn(WarningCode code, std::string message);
    void merge(const Diagnostics& other);

    bool empty() const noexcept { return warnings_.empty(); }
    bool has(WarningCode code) const noexcept;
    const std::vector<Warning>& warnings() const noexcept { return warnings_; }

private:
    std::vector<Warning> warnings_;
};

inline void warn(Diagnostics* diag, WarningCode code, std::string message) {
    if (diag != nullptr) diag->warn(code, std::move(message));
}

}  // namespace ctxpath
