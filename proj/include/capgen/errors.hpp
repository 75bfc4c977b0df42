#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace capgen {

// Base class for all engine errors. `code` groups errors into the exit-code
// classes used by the CLI: 2 = usage/input, 3 = data, 4 = numeric.
class Error : public std::runtime_error {
public:
    Error(std::string message, int code) : std::runtime_error(std::move(message)), code_(code) {}
    int exit_code() const noexcept { return code_; }

private:
    int code_;
};

struct IoError : Error {
    explicit IoError(const std::string& msg, int code = 2) : Error("IoError: " + msg, code) {}
};

struct MalformedLine : Error {
    MalformedLine(std::size_t line_no, const std::string& why)
        : Error("MalformedLine: line " + std::to_string(line_no) + ": " + why, 3), line(line_no) {}
    std::size_t line;
};

struct MalformedCsv : Error {
    explicit MalformedCsv(const std::string& why) : Error("MalformedCsv: " + why, 3) {}
};

struct BadMagic : Error {
    explicit BadMagic(const std::string& what_file) : Error("BadMagic: " + what_file, 3) {}
};

struct BadVersion : Error {
    BadVersion(const std::string& what_file, unsigned got)
        : Error("BadVersion: " + what_file + ": version " + std::to_string(got), 3) {}
};

struct TruncatedRecord : Error {
    explicit TruncatedRecord(const std::string& why) : Error("TruncatedRecord: " + why, 3) {}
};

struct TruncatedFile : Error {
    explicit TruncatedFile(const std::string& why) : Error("TruncatedFile: " + why, 3) {}
};

struct ShapeHeaderMismatch : Error {
    explicit ShapeHeaderMismatch(const std::string& why) : Error("ShapeHeaderMismatch: " + why, 3) {}
};

struct DimMismatch : Error {
    explicit DimMismatch(const std::string& why) : Error("DimMismatch: " + why, 3) {}
};

struct DuplicateId : Error {
    explicit DuplicateId(const std::string& id) : Error("DuplicateId: " + id, 3) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& why) : Error("ShapeMismatch: " + why, 3) {}
};

struct IndexOutOfRange : Error {
    explicit IndexOutOfRange(const std::string& why) : Error("IndexOutOfRange: " + why, 3) {}
};

struct InvalidConfig : Error {
    explicit InvalidConfig(const std::string& why) : Error("InvalidConfig: " + why, 2) {}
};

struct MissingFeature : Error {
    explicit MissingFeature(const std::string& image_id)
        : Error("MissingFeature: no feature vector for image '" + image_id + "'", 3), id(image_id) {}
    std::string id;
};

struct CaptionTooLong : Error {
    CaptionTooLong(const std::string& image_id, std::size_t len, std::size_t max_len)
        : Error("CaptionTooLong: image '" + image_id + "' has encoded length " + std::to_string(len) +
                    " > max_len " + std::to_string(max_len),
                3) {}
};

struct CaptionTooShort : Error {
    explicit CaptionTooShort(const std::string& image_id)
        : Error("CaptionTooShort: image '" + image_id + "' caption has fewer than 2 tokens", 3) {}
};

struct EmptyCorpus : Error {
    EmptyCorpus() : Error("EmptyCorpus: no candidate/reference entries to score", 3) {}
};

struct UnknownPreset : Error {
    explicit UnknownPreset(const std::string& name) : Error("UnknownPreset: '" + name + "'", 2) {}
};

struct VocabMismatch : Error {
    VocabMismatch(std::size_t model_vocab, std::size_t vocab_size)
        : Error("VocabMismatch: model vocab_size " + std::to_string(model_vocab) +
                    " != vocabulary size " + std::to_string(vocab_size),
                3) {}
};

struct NonFiniteLoss : Error {
    NonFiniteLoss(unsigned epoch_no, std::size_t batch_no)
        : Error("NonFiniteLoss: epoch " + std::to_string(epoch_no) + ", batch " + std::to_string(batch_no), 4),
          epoch(epoch_no),
          batch(batch_no) {}
    unsigned epoch;
    std::size_t batch;
};

}  // namespace capgen
