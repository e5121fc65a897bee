#include "ragtuner/errors.hpp"

namespace ragtuner {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateDomain: return "DuplicateDomain";
        case ErrorCode::MissingDimension: return "MissingDimension";
        case ErrorCode::UnknownDomain: return "UnknownDomain";
        case ErrorCode::UnknownElement: return "UnknownElement";
        case ErrorCode::SelfLink: return "SelfLink";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::UnindexedDomain: return "UnindexedDomain";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateTunablePath: return "DuplicateTunablePath";
        case ErrorCode::MissingAssignment: return "MissingAssignment";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::DuplicateKind: return "DuplicateKind";
        case ErrorCode::UnknownComponent: return "UnknownComponent";
        case ErrorCode::ContractMismatch: return "ContractMismatch";
        case ErrorCode::UnresolvedTunable: return "UnresolvedTunable";
        case ErrorCode::StageFailure: return "StageFailure";
        case ErrorCode::DomainAccessViolation: return "DomainAccessViolation";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateQid: return "DuplicateQid";
        case ErrorCode::EmptyGold: return "EmptyGold";
        case ErrorCode::MissingQuery: return "MissingQuery";
        case ErrorCode::DegenerateInputs: return "DegenerateInputs";
        case ErrorCode::EmptySeeds: return "EmptySeeds";
        case ErrorCode::IncompatibleTrace: return "IncompatibleTrace";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace ragtuner
