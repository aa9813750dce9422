// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#include "common/error.hpp"

namespace previz {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kOk: return "Ok";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kDuplicateId: return "DuplicateId";
    case Errc::kUnknownId: return "UnknownId";
    case Errc::kInvalidGeometry: return "InvalidGeometry";
    case Errc::kColorOutOfRange: return "ColorOutOfRange";
    case Errc::kDuplicateTime: return "DuplicateTime";
    case Errc::kTypeMismatch: return "TypeMismatch";
    case Errc::kEmptyTrack: return "EmptyTrack";
    case Errc::kEmptyRecording: return "EmptyRecording";
    case Errc::kCameraGap: return "CameraGap";
    case Errc::kCameraOverlap: return "CameraOverlap";
    case Errc::kClipOverlap: return "ClipOverlap";
    case Errc::kClipTooLong: return "ClipTooLong";
    case Errc::kDegenerateCamera: return "DegenerateCamera";
    case Errc::kUnknownCharacterId: return "UnknownCharacterId";
    case Errc::kNoRig: return "NoRig";
    case Errc::kSchemaError: return "SchemaError";
    case Errc::kEmptySequence: return "EmptySequence";
    case Errc::kEmptyRange: return "EmptyRange";
    case Errc::kNoPersons: return "NoPersons";
    case Errc::kNonPositiveScale: return "NonPositiveScale";
    case Errc::kNoOverlap: return "NoOverlap";
    case Errc::kMissingDescription: return "MissingDescription";
    case Errc::kUnmatchedMask: return "UnmatchedMask";
    case Errc::kInvalidRequest: return "InvalidRequest";
    case Errc::kBackendUnreachable: return "BackendUnreachable";
    case Errc::kFrameCountExceeded: return "FrameCountExceeded";
    case Errc::kUnknownJob: return "UnknownJob";
    case Errc::kNotDone: return "NotDone";
    case Errc::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::kCorruptFile: return "CorruptFile";
    case Errc::kUnknownAsset: return "UnknownAsset";
    case Errc::kStaleVersion: return "StaleVersion";
    case Errc::kIoError: return "IoError";
    case Errc::kJobFailed: return "JobFailed";
    case Errc::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace previz
