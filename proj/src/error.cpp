#include "fraudlab/error.hpp"

namespace fraudlab {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kConfig: return "config";
    case Errc::kSchema: return "schema";
    case Errc::kRow: return "row";
    case Errc::kIo: return "io";
    case Errc::kUndefinedRate: return "undefined-rate";
    case Errc::kInsufficientData: return "insufficient-data";
    case Errc::kStratification: return "stratification";
    case Errc::kResample: return "resample";
    case Errc::kImpurity: return "impurity";
    case Errc::kFit: return "fit";
    case Errc::kShape: return "shape";
    case Errc::kPersistence: return "persistence";
    case Errc::kMetric: return "metric";
    case Errc::kWeight: return "weight";
    case Errc::kSearch: return "search";
  }
  return "unknown";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::kConfig:
      return 2;
    case Errc::kSchema:
    case Errc::kRow:
    case Errc::kIo:
    case Errc::kUndefinedRate:
    case Errc::kInsufficientData:
    case Errc::kStratification:
    case Errc::kPersistence:
      return 3;
    default:
      return 4;
  }
}

}  // namespace fraudlab
