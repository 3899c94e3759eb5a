#include "ltvsteer/error.hpp"

namespace ltvsteer {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kIndefiniteBeyondTolerance: return "IndefiniteBeyondTolerance";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotPositiveDeterminant: return "NotPositiveDeterminant";
    case ErrorCode::kIntegrationFailure: return "IntegrationFailure";
    case ErrorCode::kRelationViolation: return "RelationViolation";
    case ErrorCode::kPartitionNotFound: return "PartitionNotFound";
    case ErrorCode::kExistenceNotCertified: return "ExistenceNotCertified";
    case ErrorCode::kFactorizationFailed: return "FactorizationFailed";
    case ErrorCode::kSingularInterleaver: return "SingularInterleaver";
    case ErrorCode::kNoCertificateApplies: return "NoCertificateApplies";
    case ErrorCode::kInfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::kAssumptionViolated: return "AssumptionViolated";
    case ErrorCode::kRdeEscape: return "RdeEscape";
    case ErrorCode::kNotControllable: return "NotControllable";
    case ErrorCode::kScheduleGap: return "ScheduleGap";
  }
  return "Unknown";
}

}  // namespace ltvsteer
