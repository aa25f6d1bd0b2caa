// Copyright (C) 2026 TokenTrim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tokentrim {

/// Base class for all tokentrim errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch between latents, caches, or masks.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf encountered where a finite value is required.
class FiniteError : public Error {
public:
    using Error::Error;
};

/// A chunk summary was requested over zero frames.
class EmptyChunkError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (out-of-range fraction, bad layout sizes, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Attention was asked to attend over an empty context; signals over-pruning upstream.
class EmptyContextError : public Error {
public:
    using Error::Error;
};

/// Failure surfaced by a generator implementation.
class GeneratorError : public Error {
public:
    using Error::Error;
};

} // namespace tokentrim
