#pragma once

#include <stdexcept>
#include <string>

namespace causwave {

// Every failure raised by the library carries a short machine-readable kind
// (e.g. "NotConverged") next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define CAUSWAVE_ERROR_KIND(Name)                                    \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

CAUSWAVE_ERROR_KIND(InvalidArgument)
CAUSWAVE_ERROR_KIND(NoCrossing)
CAUSWAVE_ERROR_KIND(EnergyDriftExceeded)
CAUSWAVE_ERROR_KIND(PropagationFailure)
CAUSWAVE_ERROR_KIND(ClusterCountMismatch)
CAUSWAVE_ERROR_KIND(FitResidualExceeded)
CAUSWAVE_ERROR_KIND(StiffnessFailure)
CAUSWAVE_ERROR_KIND(ClassicallyForbidden)
CAUSWAVE_ERROR_KIND(NewtonDivergence)
CAUSWAVE_ERROR_KIND(ZeroAtVertex)
CAUSWAVE_ERROR_KIND(MeshingFailed)
CAUSWAVE_ERROR_KIND(SingularSystem)
CAUSWAVE_ERROR_KIND(BoundaryMismatch)
CAUSWAVE_ERROR_KIND(CharacteristicCrossing)
CAUSWAVE_ERROR_KIND(EmptyOverlap)
CAUSWAVE_ERROR_KIND(IoError)

#undef CAUSWAVE_ERROR_KIND

// Search failures keep the best residual reached so callers can report it.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, double best_residual)
      : Error("NotConverged", what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace causwave
