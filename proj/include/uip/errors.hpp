#pragma once

#include <stdexcept>
#include <string>

namespace uip {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UIP_DEFINE_ERROR(Name)              \
  class Name : public Error {               \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Error(#Name ": " + what) {}       \
  };

UIP_DEFINE_ERROR(DomainError)
UIP_DEFINE_ERROR(CapExceeded)
UIP_DEFINE_ERROR(UnknownScenario)
UIP_DEFINE_ERROR(InvalidOptionSet)
UIP_DEFINE_ERROR(PartitionMismatch)
UIP_DEFINE_ERROR(MissingDp)
UIP_DEFINE_ERROR(DimensionMismatch)
UIP_DEFINE_ERROR(NumericalFailure)
UIP_DEFINE_ERROR(Infeasible)
UIP_DEFINE_ERROR(MissingFreightData)
UIP_DEFINE_ERROR(ConfigError)

#undef UIP_DEFINE_ERROR

}  // namespace uip
