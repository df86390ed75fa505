/*
 *  Copyright 2026 The bcosfire Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace bcosfire {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// A prototype produced no usable points of interest.
class ConfigurationFailed : public Error {
public:
  using Error::Error;
};

/// A ratio metric whose denominator is zero (names the metric).
class UndefinedMetric : public Error {
public:
  explicit UndefinedMetric(std::string metric)
      : Error("undefined metric: " + metric), metric_(std::move(metric)) {}

  const std::string& metric() const noexcept { return metric_; }

private:
  std::string metric_;
};

/// Bad or missing input data (files, manifests, serialized configs).
class DataError : public Error {
public:
  using Error::Error;
};

} // namespace bcosfire
