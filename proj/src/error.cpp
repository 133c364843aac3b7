#include "chartrevive/error.hpp"

namespace chartrevive {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::MalformedXml: return "MalformedXml";
    case Errc::MissingViewport: return "MissingViewport";
    case Errc::PathSyntax: return "PathSyntax";
    case Errc::ColorSyntax: return "ColorSyntax";
    case Errc::EmptyGeometry: return "EmptyGeometry";
    case Errc::UnsupportedTransform: return "UnsupportedTransform";
    case Errc::GraphTooLarge: return "GraphTooLarge";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::IoError: return "IoError";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InsufficientAxis: return "InsufficientAxis";
    case Errc::UnparsableLabel: return "UnparsableLabel";
    case Errc::IdCollision: return "IdCollision";
    case Errc::MalformedAcData: return "MalformedAcData";
    case Errc::TooFewRows: return "TooFewRows";
    case Errc::UnknownField: return "UnknownField";
    case Errc::WordCountMismatch: return "WordCountMismatch";
    case Errc::NonMonotoneTimings: return "NonMonotoneTimings";
    case Errc::MissingTimings: return "MissingTimings";
    case Errc::MarkerWordMissing: return "MarkerWordMissing";
    case Errc::NoRelevantElements: return "NoRelevantElements";
    case Errc::SelectorMiss: return "SelectorMiss";
    case Errc::UnsupportedChart: return "UnsupportedChart";
    case Errc::BadFlag: return "BadFlag";
  }
  return "UnknownError";
}

}  // namespace chartrevive
