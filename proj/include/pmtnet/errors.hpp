#pragma once

#include <stdexcept>
#include <string>

namespace pmtnet {

// Base of every error the library throws. kind() is the stable, machine
// readable tag the CLI prints on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PMTNET_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  }

PMTNET_DEFINE_ERROR(ShapeError);
PMTNET_DEFINE_ERROR(StateError);
PMTNET_DEFINE_ERROR(LabelError);
PMTNET_DEFINE_ERROR(DataError);
PMTNET_DEFINE_ERROR(DomainError);
PMTNET_DEFINE_ERROR(KindError);
PMTNET_DEFINE_ERROR(ConfigError);
PMTNET_DEFINE_ERROR(FormatError);
PMTNET_DEFINE_ERROR(IoError);
PMTNET_DEFINE_ERROR(BuildError);

#undef PMTNET_DEFINE_ERROR

}  // namespace pmtnet
