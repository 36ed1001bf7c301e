#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace dd2 {

// Machine-readable failure classes shared by every module. The names are
// part of the wire contract (HTTP error bodies, CLI JSON output).
enum class ErrorCode {
  ParseError,
  SchemaError,
  DanglingReference,
  UnknownIdentifier,
  InvalidOverride,
  RoundAlreadyActive,
  NoActiveRound,
  SessionTerminal,
  UnknownUpgrade,
  InsufficientHours,
  InsufficientProfit,
  PrerequisiteUnmet,
  AlreadyPurchased,
  EventNotOpen,
  UnknownChoice,
  ChoiceAlreadyFinal,
  AlreadyIgnored,
  LogCorrupt,
  VersionMismatch,
  PolicyIllegalAction,
  SessionNotFound,
  ConcurrentConflict,
  ScenarioInvalid,
  StoreUnavailable,
  BadRequest,
  Unauthorized,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& details() const noexcept { return details_; }

  // {code, message, details?}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace dd2
