// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace previz {

// Every failure the engine can report. The numeric values are mirrored by
// previz_status in the C API header and must stay in sync with it.
enum class Errc : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDuplicateId = 2,
  kUnknownId = 3,
  kInvalidGeometry = 4,
  kColorOutOfRange = 5,
  kDuplicateTime = 6,
  kTypeMismatch = 7,
  kEmptyTrack = 8,
  kEmptyRecording = 9,
  kCameraGap = 10,
  kCameraOverlap = 11,
  kClipOverlap = 12,
  kClipTooLong = 13,
  kDegenerateCamera = 14,
  kUnknownCharacterId = 15,
  kNoRig = 16,
  kSchemaError = 17,
  kEmptySequence = 18,
  kEmptyRange = 19,
  kNoPersons = 20,
  kNonPositiveScale = 21,
  kNoOverlap = 22,
  kMissingDescription = 23,
  kUnmatchedMask = 24,
  kInvalidRequest = 25,
  kBackendUnreachable = 26,
  kFrameCountExceeded = 27,
  kUnknownJob = 28,
  kNotDone = 29,
  kSchemaVersionMismatch = 30,
  kCorruptFile = 31,
  kUnknownAsset = 32,
  kStaleVersion = 33,
  kIoError = 34,
  kJobFailed = 35,
  kInternal = 36,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace previz
