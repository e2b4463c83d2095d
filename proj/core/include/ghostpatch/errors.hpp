/* Copyright 2026 The Ghostpatch Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace ghostpatch {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

// Raised before any oracle call once a budget has no queries left.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

// The oracle endpoint could not be reached at all.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The oracle answered, but with something that violates the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// The oracle answered with a non-200 status.
class OracleHttpError : public Error {
 public:
  OracleHttpError(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class EmptyIndex : public Error {
 public:
  using Error::Error;
};

// No database record survives the score filter.
class NoCandidates : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class DigestMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace ghostpatch
