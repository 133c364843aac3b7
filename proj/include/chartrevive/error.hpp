#pragma once

#include <stdexcept>
#include <string>

namespace chartrevive {

enum class Errc {
  MalformedXml,
  MissingViewport,
  PathSyntax,
  ColorSyntax,
  EmptyGeometry,
  UnsupportedTransform,
  GraphTooLarge,
  DimMismatch,
  LabelOutOfRange,
  NonFiniteLoss,
  IoError,
  VersionMismatch,
  ChecksumMismatch,
  InvalidSpec,
  InsufficientAxis,
  UnparsableLabel,
  IdCollision,
  MalformedAcData,
  TooFewRows,
  UnknownField,
  WordCountMismatch,
  NonMonotoneTimings,
  MissingTimings,
  MarkerWordMissing,
  NoRelevantElements,
  SelectorMiss,
  UnsupportedChart,
  BadFlag,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace chartrevive
