#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driverid {

enum class ErrorCode {
  // obd_codec
  UnknownPid,
  PayloadLengthMismatch,
  InvalidRegistry,
  // ingest
  MissingLabelColumn,
  RaggedRow,
  NonNumericCell,
  MissingCell,
  EmptyDataset,
  SchemaMismatch,
  UnknownLabel,
  // preprocess
  UnknownFeatureName,
  ColumnCountMismatch,
  WindowLongerThanSeries,
  InvalidWindowSpec,
  // models
  DimensionMismatch,
  LengthMismatch,
  EmptyTrainingSet,
  SingleClassForDiscriminative,
  NonFiniteFeature,
  ModelFormat,
  // eval
  IndexOutOfRange,
  EmptyMatrix,
  TooFewInstancesPerClass,
  NoBaselineDesignated,
  // shared
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `what()` reads
/// "<module>: <ErrorCode>: <detail>" so the CLI can print it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string_view module, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string module_;
  std::string detail_;
};

}  // namespace driverid
