#pragma once

#include <stdexcept>
#include <string>

namespace dbmc {

// Single exception type; tests and the CLI dispatch on the code.
class Error : public std::runtime_error {
public:
  enum class Code {
    BadIndex,
    DuplicateEdge,
    NonPositiveWeight,
    BadSourceSet,
    DisconnectedGraph,
    ConnectivityFailure,
    DomainViolation,
    NonFiniteState,
    EventBeforeStart,
    WindowTooShort,
    TooLarge,
    BadInput,
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Code code() const { return code_; }

  static const char* name(Code c) {
    switch (c) {
      case Code::BadIndex: return "BadIndex";
      case Code::DuplicateEdge: return "DuplicateEdge";
      case Code::NonPositiveWeight: return "NonPositiveWeight";
      case Code::BadSourceSet: return "BadSourceSet";
      case Code::DisconnectedGraph: return "DisconnectedGraph";
      case Code::ConnectivityFailure: return "ConnectivityFailure";
      case Code::DomainViolation: return "DomainViolation";
      case Code::NonFiniteState: return "NonFiniteState";
      case Code::EventBeforeStart: return "EventBeforeStart";
      case Code::WindowTooShort: return "WindowTooShort";
      case Code::TooLarge: return "TooLarge";
      case Code::BadInput: return "BadInput";
    }
    return "Unknown";
  }

private:
  Code code_;
};

}  // namespace dbmc
