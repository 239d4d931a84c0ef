// SPDX-License-Identifier: Apache-2.0
//
// mmsense - massive-MIMO activity sensing toolkit
// Copyright (C) 2026 The mmsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MMSENSE_TENSOR_IO_HPP
#define MMSENSE_TENSOR_IO_HPP

// MMT3 tensor file:
//   bytes 0..3   "MMT3"
//   byte  4      element kind, 0 = real64, 1 = complex128
//   bytes 5..28  d1, d2, d3 as little-endian uint64
//   payload      little-endian IEEE-754 doubles in linearization order,
//                complex values interleaved (re, im)

#include "mmsense/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>

namespace mmsense::io
{

enum class ElementKind : std::uint8_t
{
    Real64 = 0,
    Complex128 = 1,
};

void write_tensor(std::ostream &os, const RealTensor3 &t);
void write_tensor(std::ostream &os, const ComplexTensor3 &t);
void write_tensor(const std::filesystem::path &path, const RealTensor3 &t);
void write_tensor(const std::filesystem::path &path, const ComplexTensor3 &t);

// Throws DataError on a truncated or malformed stream.
std::variant<RealTensor3, ComplexTensor3> read_tensor(std::istream &is);
std::variant<RealTensor3, ComplexTensor3> read_tensor(const std::filesystem::path &path);

// Convenience wrappers that also reject the wrong element kind.
ComplexTensor3 read_complex_tensor(const std::filesystem::path &path);
RealTensor3 read_real_tensor(const std::filesystem::path &path);

} // namespace mmsense::io

#endif
