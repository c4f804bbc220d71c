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

// Little-endian binary helpers shared by the basis cache and model files.

#pragma once

#include <geoscatter/core.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

namespace geoscatter::detail {

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void put(std::ostream& out, T value) {
  value = to_little_endian(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

inline void put_doubles(std::ostream& out, const Scalar* data, Index count) {
  for (Index i = 0; i < count; ++i) put(out, std::bit_cast<std::uint64_t>(data[i]));
}

/// `source` names the file kind in the truncation message.
template <typename T>
T get(std::istream& in, const std::string& source, const std::string& what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError(source + " truncated while reading " + what);
  }
  return to_little_endian(value);
}

inline void get_doubles(std::istream& in, Scalar* data, Index count, const std::string& source,
                        const std::string& what) {
  for (Index i = 0; i < count; ++i) data[i] = std::bit_cast<Scalar>(get<std::uint64_t>(in, source, what));
}

}  // namespace geoscatter::detail
