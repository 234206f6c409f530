#include "cgua/error.hpp"

namespace cgua {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::InvalidEmbedding: return "InvalidEmbedding";
    case ErrorKind::InconsistentCatalog: return "InconsistentCatalog";
    case ErrorKind::EmptyScene: return "EmptyScene";
    case ErrorKind::NegativeLambda: return "NegativeLambda";
    case ErrorKind::InvalidTemperature: return "InvalidTemperature";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NoPairedClusters: return "NoPairedClusters";
    case ErrorKind::EmptyUnpairedBank: return "EmptyUnpairedBank";
    case ErrorKind::UnknownCluster: return "UnknownCluster";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::NoRelevant: return "NoRelevant";
    case ErrorKind::InfeasiblePacking: return "InfeasiblePacking";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace cgua
