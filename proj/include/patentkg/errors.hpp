#pragma once

#include <stdexcept>
#include <string>

namespace patentkg {

// Base for all pipeline failures.
class PipelineError : public std::runtime_error {
public:
    explicit PipelineError(const std::string& what) : std::runtime_error(what) {}
};

// Misconfiguration (bad provider setup, unloadable model, invalid config
// values). Fatal for the whole run.
class ConfigError : public PipelineError {
public:
    explicit ConfigError(const std::string& what) : PipelineError(what) {}
};

// Malformed input data (fixture mismatch, bad file line, invariant
// violation in provider output). Scoped to one record or sentence.
class DataError : public PipelineError {
public:
    explicit DataError(const std::string& what) : PipelineError(what) {}
};

// Sentence exceeds the encoder input length; the sentence is skipped.
class SentenceTooLong : public DataError {
public:
    explicit SentenceTooLong(const std::string& what) : DataError(what) {}
};

}  // namespace patentkg
