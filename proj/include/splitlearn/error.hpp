// Copyright (c) 2026 The splitlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace splitlearn {

/// Shapes that do not chain, disagree, or exceed a kernel's reach.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A split plan that cannot be realized: bad cuts, broken shape chain.
class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Misuse of a stateful object: consumed or stale forward caches, wrong role.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The two parties disagree on where they are in the session.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed bytes: wire frames, tensor encodings, IDX files, plan files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The peer went away.
class ConnectionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitlearn
