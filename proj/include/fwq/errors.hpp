#pragma once

#include <stdexcept>
#include <string>

namespace fwq {

enum class Errc {
  NonHyperbolic,
  NoRoot,
  Unreachable,
  BoxTooSmall,
  NoIntersection,
  OnCircle,
  ThresholdNotFound,
  DomainError,
  BadRegionEmpty,
  Degenerate,
  BadBothSides,
  Config,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fwq
