#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace triage {

// Exit categories used by the CLI: 2 = I/O or parse problem, 3 = data/training problem.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg, int exit_code = 2)
        : std::runtime_error(msg), exit_code_(exit_code) {}
    int exit_code() const { return exit_code_; }

private:
    int exit_code_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg, 2) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg, 3) {}
};

// --- timeline store ---

class MissingHeader : public ParseError {
public:
    explicit MissingHeader(const std::string& msg) : ParseError("missing header: " + msg) {}
};

class MalformedRow : public ParseError {
public:
    MalformedRow(std::uint64_t row_id, const std::string& reason)
        : ParseError("malformed row " + std::to_string(row_id) + ": " + reason),
          row_id(row_id),
          reason(reason) {}
    std::uint64_t row_id;
    std::string reason;
};

class UnknownField : public ParseError {
public:
    explicit UnknownField(const std::string& name) : ParseError("unknown field: " + name) {}
};

// --- artefact index ---

class UnknownArtefact : public DataError {
public:
    explicit UnknownArtefact(const std::string& path)
        : DataError("artefact not present in index: " + path) {}
};

// --- feature engine ---

class EmptyConfig : public DataError {
public:
    explicit EmptyConfig(const std::string& msg = "no keywords and top_k = 0")
        : DataError("empty feature config: " + msg) {}
};

class DegenerateLabels : public DataError {
public:
    explicit DegenerateLabels(const std::string& msg = "requires both classes")
        : DataError("degenerate labels: " + msg) {}
};

// --- hash catalog ---

class MalformedLine : public ParseError {
public:
    MalformedLine(std::uint64_t line_no, const std::string& reason)
        : ParseError("malformed line " + std::to_string(line_no) + ": " + reason),
          line_no(line_no) {}
    std::uint64_t line_no;
};

class DuplicateConflictingDigest : public ParseError {
public:
    explicit DuplicateConflictingDigest(const std::string& digest)
        : ParseError("digest inserted twice with conflicting labels: " + digest) {}
};

class InvalidDigest : public ParseError {
public:
    explicit InvalidDigest(const std::string& digest)
        : ParseError("not a valid SHA-1/SHA-256 hex digest: " + digest) {}
};

// --- relevancy model ---

class SingleClass : public DataError {
public:
    explicit SingleClass(const std::string& msg = "training set contains a single class")
        : DataError(msg) {}
};

class NonFiniteLoss : public DataError {
public:
    explicit NonFiniteLoss(int epoch)
        : DataError("loss became non-finite at epoch " + std::to_string(epoch) +
                    " (learning rate too large?)") {}
};

class SchemaMismatch : public DataError {
public:
    SchemaMismatch(const std::string& expected, const std::string& got)
        : DataError("schema fingerprint mismatch: model trained on " + expected +
                    ", vector extracted with " + got) {}
};

class VersionMismatch : public ParseError {
public:
    explicit VersionMismatch(const std::string& msg) : ParseError("model version mismatch: " + msg) {}
};

class CorruptModel : public ParseError {
public:
    explicit CorruptModel(const std::string& msg) : ParseError("corrupt model file: " + msg) {}
};

// --- ranking ---

class EmptyTruth : public DataError {
public:
    explicit EmptyTruth(const std::string& msg = "recall evaluation needs a nonempty truth set")
        : DataError(msg) {}
};

class UnknownTruthArtefact : public DataError {
public:
    explicit UnknownTruthArtefact(const std::string& path)
        : DataError("truth artefact not present in ranked list: " + path) {}
};

// --- scenario forge ---

class InvalidSpec : public DataError {
public:
    explicit InvalidSpec(const std::string& msg) : DataError("invalid scenario spec: " + msg) {}
};

}  // namespace triage
