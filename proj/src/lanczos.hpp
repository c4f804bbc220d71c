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

#include <geoscatter/core.hpp>

#include <cstdint>

namespace geoscatter::detail {

struct LanczosResult {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
  Index steps = 0;
};

/// Smallest k eigenpairs of a sparse symmetric positive semi-definite matrix by
/// shift-invert Lanczos with full reorthogonalization. `shift` must lie below
/// the spectrum so that B - shift I is positive definite.
LanczosResult shift_invert_lanczos(const SparseMatrix& b, Index k, Scalar shift,
                                   std::uint64_t seed);

}  // namespace geoscatter::detail
