// Error taxonomy shared by every ccsim module.
#pragma once

#include <stdexcept>
#include <string>

namespace ccsim {

enum class Errc {
  UnsupportedCoding,   // codec asked for a content coding it cannot produce
  InvalidLevel,        // compression level outside the coding's legal range
  DecodeError,         // malformed compressed payload
  SafetyCapExceeded,   // decompression or bomb synthesis would pass the byte cap
  RatioUnreachable,    // corpus generator cannot hit the requested gzip ratio
  ConfigError,         // malformed scenario/profile input, bad CLI combination
  IncompleteObservation,  // probe classification lacks the canonical inputs
  DegenerateScenario,  // amplification over an empty client link
  UpstreamError,       // chain hop failed to produce a response
  ProbeTransportError  // probe could not reach the target endpoint
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnsupportedCoding: return "UnsupportedCoding";
    case Errc::InvalidLevel: return "InvalidLevel";
    case Errc::DecodeError: return "DecodeError";
    case Errc::SafetyCapExceeded: return "SafetyCapExceeded";
    case Errc::RatioUnreachable: return "RatioUnreachable";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IncompleteObservation: return "IncompleteObservation";
    case Errc::DegenerateScenario: return "DegenerateScenario";
    case Errc::UpstreamError: return "UpstreamError";
    case Errc::ProbeTransportError: return "ProbeTransportError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ccsim
