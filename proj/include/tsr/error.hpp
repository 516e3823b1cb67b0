#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

// Caller supplied something that violates a precondition. Maps to CLI exit 1.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Everything below is a runtime failure. Maps to CLI exit 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& what) : std::runtime_error(what) {}
};

class NumericalFailure : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class TrainingFailure : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class DegenerateEmbedding : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class IndexingError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class LookupError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class IncompleteJudgment : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

// Retries exhausted while talking to a captioning endpoint.
class CaptioningFailure : public RuntimeFailure {
 public:
  CaptioningFailure(const std::string& what, std::string last_response)
      : RuntimeFailure(what), last_response_(std::move(last_response)) {}
  const std::string& last_response() const noexcept { return last_response_; }

 private:
  std::string last_response_;
};

// The endpoint answered, but not with exactly the requested captions.
class ValidationError : public CaptioningFailure {
 public:
  using CaptioningFailure::CaptioningFailure;
};

}  // namespace tsr
