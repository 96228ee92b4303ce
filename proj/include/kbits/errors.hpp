#pragma once

#include <stdexcept>
#include <string>

namespace kbits {

struct MalformedFrame : std::runtime_error {
    explicit MalformedFrame(const std::string& what) : std::runtime_error(what) {}
};
struct CrcMismatch : std::runtime_error {
    explicit CrcMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedVersion : std::runtime_error {
    explicit UnsupportedVersion(const std::string& what) : std::runtime_error(what) {}
};
struct ConfigMismatch : std::runtime_error {
    explicit ConfigMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct TranscriptMismatch : std::runtime_error {
    explicit TranscriptMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct InsufficientBits : std::runtime_error {
    explicit InsufficientBits(const std::string& what) : std::runtime_error(what) {}
};
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};
struct TimeoutError : std::runtime_error {
    explicit TimeoutError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kbits
