#pragma once

#include <compare>
#include <string>
#include <utility>

namespace concore {

class OperatorId {
 public:
  OperatorId() = default;
  explicit OperatorId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const OperatorId&, const OperatorId&) = default;

 private:
  std::string value_;
};

}  // namespace concore
