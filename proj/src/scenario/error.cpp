#include "dd2/error.h"

namespace dd2 {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::InvalidOverride: return "InvalidOverride";
    case ErrorCode::RoundAlreadyActive: return "RoundAlreadyActive";
    case ErrorCode::NoActiveRound: return "NoActiveRound";
    case ErrorCode::SessionTerminal: return "SessionTerminal";
    case ErrorCode::UnknownUpgrade: return "UnknownUpgrade";
    case ErrorCode::InsufficientHours: return "InsufficientHours";
    case ErrorCode::InsufficientProfit: return "InsufficientProfit";
    case ErrorCode::PrerequisiteUnmet: return "PrerequisiteUnmet";
    case ErrorCode::AlreadyPurchased: return "AlreadyPurchased";
    case ErrorCode::EventNotOpen: return "EventNotOpen";
    case ErrorCode::UnknownChoice: return "UnknownChoice";
    case ErrorCode::ChoiceAlreadyFinal: return "ChoiceAlreadyFinal";
    case ErrorCode::AlreadyIgnored: return "AlreadyIgnored";
    case ErrorCode::LogCorrupt: return "LogCorrupt";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::PolicyIllegalAction: return "PolicyIllegalAction";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::ConcurrentConflict: return "ConcurrentConflict";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::StoreUnavailable: return "StoreUnavailable";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::Unauthorized: return "Unauthorized";
  }
  return "Unknown";
}

nlohmann::json Error::to_json() const {
  nlohmann::json j = {{"code", std::string(error_code_name(code_))}, {"message", what()}};
  if (!details_.is_null()) j["details"] = details_;
  return j;
}

}  // namespace dd2
