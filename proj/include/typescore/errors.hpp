#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace typescore {

// Root of every error the toolkit throws on purpose. The CLI maps these to
// exit status 1; anything else is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TYPESCORE_DEFINE_ERROR(Name)         \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

TYPESCORE_DEFINE_ERROR(ValidationError);
TYPESCORE_DEFINE_ERROR(MissingQuote);
TYPESCORE_DEFINE_ERROR(EmptyCorpus);
TYPESCORE_DEFINE_ERROR(PreconditionError);
TYPESCORE_DEFINE_ERROR(IoError);

// Extraction / transport.
TYPESCORE_DEFINE_ERROR(BackendError);
class AuthError : public BackendError {
 public:
  using BackendError::BackendError;
};
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};
class EmptyResponse : public BackendError {
 public:
  using BackendError::BackendError;
};
class AdapterError : public BackendError {
 public:
  using BackendError::BackendError;
};
TYPESCORE_DEFINE_ERROR(IdMismatch);

// Pipeline.
TYPESCORE_DEFINE_ERROR(UnknownInstruction);
TYPESCORE_DEFINE_ERROR(EmptyRun);
TYPESCORE_DEFINE_ERROR(MissingMetric);

// Meta-evaluation.
TYPESCORE_DEFINE_ERROR(TooFewJudgments);
TYPESCORE_DEFINE_ERROR(MissingScore);
TYPESCORE_DEFINE_ERROR(NoUsablePairs);
TYPESCORE_DEFINE_ERROR(EmptyInput);
TYPESCORE_DEFINE_ERROR(LengthMismatch);
TYPESCORE_DEFINE_ERROR(TooFewPoints);
TYPESCORE_DEFINE_ERROR(DuplicateKey);

// Annotation service.
TYPESCORE_DEFINE_ERROR(GoldSetMissing);
TYPESCORE_DEFINE_ERROR(NotQualified);
TYPESCORE_DEFINE_ERROR(NoTasksRemaining);
TYPESCORE_DEFINE_ERROR(DuplicateJudgment);
TYPESCORE_DEFINE_ERROR(UnknownPair);
TYPESCORE_DEFINE_ERROR(StaleTask);

#undef TYPESCORE_DEFINE_ERROR

}  // namespace typescore
