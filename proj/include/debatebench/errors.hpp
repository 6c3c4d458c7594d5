#pragma once

#include <stdexcept>
#include <string>

namespace debatebench {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- configuration / input validation -------------------------------------

class ConfigError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

// ---- prompt rendering ------------------------------------------------------

class IncompatibleStage : public Error {
public:
    using Error::Error;
};

class PerspectiveMismatch : public Error {
public:
    using Error::Error;
};

class IncompleteTranscript : public Error {
public:
    using Error::Error;
};

// ---- gateway ---------------------------------------------------------------

class GatewayError : public Error {
public:
    using Error::Error;
};

class TimeoutError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class RateLimitedError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class EndpointError : public GatewayError {
public:
    EndpointError(int status, const std::string& what)
        : GatewayError(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class EmptyCompletion : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ScriptMiss : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class DuplicateFingerprint : public Error {
public:
    using Error::Error;
};

// ---- debate engine ---------------------------------------------------------

class TurnFailed : public Error {
public:
    TurnFailed(int turn_index, const std::string& cause)
        : Error("turn " + std::to_string(turn_index) + " failed: " + cause),
          turn_index_(turn_index),
          cause_(cause) {}
    int turn_index() const { return turn_index_; }
    const std::string& cause() const { return cause_; }

private:
    int turn_index_;
    std::string cause_;
};

// ---- judge -----------------------------------------------------------------

class StrictParseError : public Error {
public:
    using Error::Error;
};

class LenientParseError : public Error {
public:
    using Error::Error;
};

class VerdictUnrecoverable : public Error {
public:
    VerdictUnrecoverable(const std::string& what, std::string raw_reply)
        : Error(what), raw_reply_(std::move(raw_reply)) {}
    const std::string& raw_reply() const { return raw_reply_; }

private:
    std::string raw_reply_;
};

class JudgeCallFailed : public Error {
public:
    using Error::Error;
};

// ---- tournament ------------------------------------------------------------

class EmptyRoster : public Error {
public:
    using Error::Error;
};

class EmptyTopics : public Error {
public:
    using Error::Error;
};

class MissingVerdict : public Error {
public:
    using Error::Error;
};

class DuplicateTopic : public Error {
public:
    using Error::Error;
};

class MissingTopic : public Error {
public:
    using Error::Error;
};

class IncompleteSeriesSet : public Error {
public:
    using Error::Error;
};

// ---- run store -------------------------------------------------------------

class DuplicateId : public Error {
public:
    using Error::Error;
};

class StorageFailure : public Error {
public:
    using Error::Error;
};

class ManifestMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace debatebench
