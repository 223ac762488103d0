#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace synq {

// Machine-readable error codes. The names are part of the service and CLI
// contract and must not be renamed.
enum class ErrorCode {
  MalformedLine,
  HeadOutOfRange,
  CyclicTree,
  MultipleRoots,
  DuplicateDocument,
  UnknownSentence,
  InvalidIndex,
  SyntaxError,
  UnknownNodeId,
  DisconnectedPattern,
  NoConstrainedNode,
  MarkupMismatch,
  NoMarkedToken,
  UnknownList,
  EmptyCorpus,
  FingerprintMismatch,
  CorruptIndex,
  UnknownCapture,
  UnknownLabel,
  InsufficientData,
  EmptyOverlap,
  DomainMismatch,
  InvalidDistribution,
  Empty,
  EmptyTraining,
  InvalidRecord,
  StorageFailure,
  CompileError,
  ParserUnavailable,
  MissingData,
  UnknownCorpus,
  BadRequest,
  IoError,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::HeadOutOfRange: return "HeadOutOfRange";
    case ErrorCode::CyclicTree: return "CyclicTree";
    case ErrorCode::MultipleRoots: return "MultipleRoots";
    case ErrorCode::DuplicateDocument: return "DuplicateDocument";
    case ErrorCode::UnknownSentence: return "UnknownSentence";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownNodeId: return "UnknownNodeId";
    case ErrorCode::DisconnectedPattern: return "DisconnectedPattern";
    case ErrorCode::NoConstrainedNode: return "NoConstrainedNode";
    case ErrorCode::MarkupMismatch: return "MarkupMismatch";
    case ErrorCode::NoMarkedToken: return "NoMarkedToken";
    case ErrorCode::UnknownList: return "UnknownList";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::CorruptIndex: return "CorruptIndex";
    case ErrorCode::UnknownCapture: return "UnknownCapture";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptyOverlap: return "EmptyOverlap";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::EmptyTraining: return "EmptyTraining";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::CompileError: return "CompileError";
    case ErrorCode::ParserUnavailable: return "ParserUnavailable";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::UnknownCorpus: return "UnknownCorpus";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  // 1-based source line, when the error refers to a line of input.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> line_;
};

}  // namespace synq
