#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace concore {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON, predicate text, persisted concept).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// One or more operator specs failed validation. Carries every offending id.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> operator_ids)
      : Error(what), operator_ids_(std::move(operator_ids)) {}

  const std::vector<std::string>& operator_ids() const noexcept { return operator_ids_; }

 private:
  std::vector<std::string> operator_ids_;
};

class DuplicateOperatorError : public Error {
 public:
  explicit DuplicateOperatorError(std::string id)
      : Error("duplicate operator_id: " + id), id_(std::move(id)) {}

  const std::string& operator_id() const noexcept { return id_; }

 private:
  std::string id_;
};

class UnknownOperatorError : public Error {
 public:
  UnknownOperatorError(const std::string& name, std::vector<std::string> suggestions);

  const std::vector<std::string>& suggestions() const noexcept { return suggestions_; }

 private:
  std::vector<std::string> suggestions_;
};

class DormantConceptError : public Error {
 public:
  using Error::Error;
};

class InvalidUpdateError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class PersistenceError : public Error {
 public:
  using Error::Error;
};

/// A scenario turn produced something other than what the fixture expects.
class ExpectationMismatch : public Error {
 public:
  ExpectationMismatch(std::size_t turn, std::string field, const std::string& detail);

  std::size_t turn() const noexcept { return turn_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t turn_;
  std::string field_;
};

}  // namespace concore
