/* Copyright 2026 The Cola Toolkit Authors. All Rights Reserved.

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

namespace cola {

// Base for every error the toolkit raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: violated preconditions, invalid parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem or stream failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed bytes: framestream headers, JSON bodies, prompt text.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Configuration and manifest problems (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A model endpoint could not produce a usable response.
class EndpointError : public Error {
 public:
  EndpointError(std::string endpoint, const std::string& what)
      : Error("[" + endpoint + "] " + what), endpoint_(std::move(endpoint)) {}

  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

// Prompt longer than the endpoint accepts; never truncated silently.
class OversizeError : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

}  // namespace cola
