#include "fwq/errors.hpp"

namespace fwq {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NonHyperbolic: return "NonHyperbolic";
    case Errc::NoRoot: return "NoRoot";
    case Errc::Unreachable: return "Unreachable";
    case Errc::BoxTooSmall: return "BoxTooSmall";
    case Errc::NoIntersection: return "NoIntersection";
    case Errc::OnCircle: return "OnCircle";
    case Errc::ThresholdNotFound: return "ThresholdNotFound";
    case Errc::DomainError: return "DomainError";
    case Errc::BadRegionEmpty: return "BadRegionEmpty";
    case Errc::Degenerate: return "Degenerate";
    case Errc::BadBothSides: return "BadBothSides";
    case Errc::Config: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(Errc c, const std::string& what)
    : std::runtime_error(std::string(errc_name(c)) + ": " + what), code_(c) {}

}  // namespace fwq
