// Copyright 2026 The geoscatter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace geoscatter {

using Scalar = double;
using Index = Eigen::Index;

using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<Scalar>;
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

/// Base class for every error the library reports. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mesh or dataset input violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied an inconsistent parameter set.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its accuracy contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Scattering path enumeration exceeded the configured cap.
class PathCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoscatter
