#include "driverid/error.hpp"

namespace driverid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownPid: return "UnknownPid";
    case ErrorCode::PayloadLengthMismatch: return "PayloadLengthMismatch";
    case ErrorCode::InvalidRegistry: return "InvalidRegistry";
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownFeatureName: return "UnknownFeatureName";
    case ErrorCode::ColumnCountMismatch: return "ColumnCountMismatch";
    case ErrorCode::WindowLongerThanSeries: return "WindowLongerThanSeries";
    case ErrorCode::InvalidWindowSpec: return "InvalidWindowSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SingleClassForDiscriminative: return "SingleClassForDiscriminative";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::TooFewInstancesPerClass: return "TooFewInstancesPerClass";
    case ErrorCode::NoBaselineDesignated: return "NoBaselineDesignated";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string_view module, const std::string& detail)
    : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + detail),
      code_(code),
      module_(module),
      detail_(detail) {}

}  // namespace driverid
