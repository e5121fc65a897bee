#pragma once

#include <stdexcept>
#include <string>

namespace ragtuner {

enum class ErrorCode {
    // dem
    DuplicateDomain,
    MissingDimension,
    UnknownDomain,
    UnknownElement,
    SelfLink,
    DimensionMismatch,
    UnindexedDomain,
    // dsl
    SyntaxError,
    SchemaError,
    DuplicateTunablePath,
    MissingAssignment,
    OutOfBounds,
    // runtime
    DuplicateKind,
    UnknownComponent,
    ContractMismatch,
    UnresolvedTunable,
    StageFailure,
    DomainAccessViolation,
    // evaluation
    ParseError,
    DuplicateQid,
    EmptyGold,
    MissingQuery,
    // tuner
    DegenerateInputs,
    EmptySeeds,
    IncompatibleTrace,
    // providers / io
    ProviderError,
    Timeout,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ragtuner
