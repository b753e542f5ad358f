#pragma once

#include <stdexcept>
#include <string>

namespace warpspec {

// Every user-facing failure goes through CompileError so the CLI can map it
// to a stable exit code. Internal invariant breakage uses InternalError.
enum class ErrorCode {
    Parse,
    Type,
    UnsupportedKernel,
    PipelineInfeasible,
    StagePlanAmbiguous,
    UnloweredAref,
    SmemOverflow,
    IndivisibleTile,
    RegisterBudget,
    ProtocolViolation,
    Io,
    Eval,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Type: return "type";
        case ErrorCode::UnsupportedKernel: return "unsupported-kernel";
        case ErrorCode::PipelineInfeasible: return "pipeline-infeasible";
        case ErrorCode::StagePlanAmbiguous: return "stage-plan-ambiguous";
        case ErrorCode::UnloweredAref: return "unlowered-aref";
        case ErrorCode::SmemOverflow: return "smem-overflow";
        case ErrorCode::IndivisibleTile: return "indivisible-tile";
        case ErrorCode::RegisterBudget: return "register-budget";
        case ErrorCode::ProtocolViolation: return "protocol-violation";
        case ErrorCode::Io: return "io";
        case ErrorCode::Eval: return "eval";
    }
    return "unknown";
}

class CompileError : public std::runtime_error {
  public:
    CompileError(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

class InternalError : public std::logic_error {
  public:
    explicit InternalError(const std::string& msg) : std::logic_error("internal: " + msg) {}
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw CompileError(code, msg);
}

}  // namespace warpspec
