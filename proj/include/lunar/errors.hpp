// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace lunar {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
  public:
    using Error::Error;
};

// Gram matrix (or its dual) is not positive definite and no regularization was given.
class SingularSystemError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// Checkpoint / binary payload is malformed or from an unsupported version.
class FormatError : public IoError {
  public:
    using IoError::IoError;
};

// Loss went non-finite during an optimization loop.
class DivergenceError : public Error {
  public:
    using Error::Error;
};

}  // namespace lunar
