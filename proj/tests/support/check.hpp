// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common/error.hpp"
#include "doctest.h"
#include "support/gen.hpp"

// Asserts that `expr` throws previz::Error carrying `code`.
#define CHECK_ERRC(expr, want)                                             \
  do {                                                                      \
    bool thrown_ = false;                                                   \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const previz::Error& e_) {                                     \
      thrown_ = true;                                                       \
      CHECK_MESSAGE(e_.code() == (want), "got " << previz::errc_name(e_.code())); \
    }                                                                       \
    CHECK_MESSAGE(thrown_, "expected " << previz::errc_name(want));         \
  } while (0)
