#pragma once

#include <stdexcept>
#include <string>

namespace agentnet {

enum class Errc {
    EncodingUnsupported,
    ChainInconsistent,
    ScenarioInvalid,
    ScopeDenied,
    NotHeld,
    BadConfig,
    CapsuleMalformed,
    PayloadTooLarge,
    BadMagic,
    BadVersion,
    LengthMismatch,
    BadTag,
    QueueEmpty,
    NoTargets,
    Unreachable,
    MissingEdge,
    BadRequest,
    Undeliverable,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace agentnet
