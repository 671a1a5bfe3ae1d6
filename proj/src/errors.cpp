#include "agentnet/errors.hpp"

namespace agentnet {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::EncodingUnsupported: return "EncodingUnsupported";
    case Errc::ChainInconsistent: return "ChainInconsistent";
    case Errc::ScenarioInvalid: return "ScenarioInvalid";
    case Errc::ScopeDenied: return "ScopeDenied";
    case Errc::NotHeld: return "NotHeld";
    case Errc::BadConfig: return "BadConfig";
    case Errc::CapsuleMalformed: return "CapsuleMalformed";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadVersion: return "BadVersion";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::BadTag: return "BadTag";
    case Errc::QueueEmpty: return "QueueEmpty";
    case Errc::NoTargets: return "NoTargets";
    case Errc::Unreachable: return "Unreachable";
    case Errc::MissingEdge: return "MissingEdge";
    case Errc::BadRequest: return "BadRequest";
    case Errc::Undeliverable: return "Undeliverable";
    }
    return "UnknownError";
}

} // namespace agentnet
