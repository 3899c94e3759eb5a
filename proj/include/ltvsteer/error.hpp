#pragma once

#include <stdexcept>
#include <string>

namespace ltvsteer {

// Every failure raised by the library carries one of these codes. The C API
// maps them one-to-one onto ltv_status values.
enum class ErrorCode {
  kInvalidArgument,
  kNotSymmetric,
  kIndefiniteBeyondTolerance,
  kNotPositiveDefinite,
  kNotPositiveDeterminant,
  kIntegrationFailure,
  kRelationViolation,
  kPartitionNotFound,
  kExistenceNotCertified,
  kFactorizationFailed,
  kSingularInterleaver,
  kNoCertificateApplies,
  kInfeasibleTarget,
  kAssumptionViolated,
  kRdeEscape,
  kNotControllable,
  kScheduleGap,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ltvsteer
