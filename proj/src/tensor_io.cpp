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

#include "mmsense/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace mmsense::io
{
namespace
{

constexpr std::array<char, 4> kMagic{'M', 'M', 'T', '3'};

void put_u64(std::ostream &os, std::uint64_t v)
{
    std::array<char, 8> buf{};
    for (int b = 0; b < 8; ++b)
        buf[b] = static_cast<char>((v >> (8 * b)) & 0xFFu);
    os.write(buf.data(), buf.size());
}

std::uint64_t get_u64(std::istream &is)
{
    std::array<unsigned char, 8> buf{};
    if (!is.read(reinterpret_cast<char *>(buf.data()), buf.size()))
        throw DataError("MMT3: truncated header");
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b)
        v = (v << 8) | buf[b];
    return v;
}

void put_doubles(std::ostream &os, const double *values, std::size_t n)
{
    if constexpr (std::endian::native == std::endian::little)
    {
        os.write(reinterpret_cast<const char *>(values), static_cast<std::streamsize>(n * sizeof(double)));
    }
    else
    {
        for (std::size_t i = 0; i < n; ++i)
            put_u64(os, std::bit_cast<std::uint64_t>(values[i]));
    }
}

void get_doubles(std::istream &is, double *values, std::size_t n)
{
    if constexpr (std::endian::native == std::endian::little)
    {
        if (!is.read(reinterpret_cast<char *>(values), static_cast<std::streamsize>(n * sizeof(double))))
            throw DataError("MMT3: truncated payload");
    }
    else
    {
        for (std::size_t i = 0; i < n; ++i)
            values[i] = std::bit_cast<double>(get_u64(is));
    }
}

void write_header(std::ostream &os, ElementKind kind, const Dims3 &d)
{
    os.write(kMagic.data(), kMagic.size());
    const char k = static_cast<char>(kind);
    os.write(&k, 1);
    put_u64(os, d.d1);
    put_u64(os, d.d2);
    put_u64(os, d.d3);
}

std::ofstream open_out(const std::filesystem::path &path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw DataError("cannot open " + path.string() + " for writing");
    return os;
}

} // namespace

void write_tensor(std::ostream &os, const RealTensor3 &t)
{
    write_header(os, ElementKind::Real64, t.dims());
    put_doubles(os, t.data().data(), t.size());
    if (!os)
        throw DataError("MMT3: write failed");
}

void write_tensor(std::ostream &os, const ComplexTensor3 &t)
{
    write_header(os, ElementKind::Complex128, t.dims());
    put_doubles(os, reinterpret_cast<const double *>(t.data().data()), 2 * t.size());
    if (!os)
        throw DataError("MMT3: write failed");
}

void write_tensor(const std::filesystem::path &path, const RealTensor3 &t)
{
    auto os = open_out(path);
    write_tensor(os, t);
}

void write_tensor(const std::filesystem::path &path, const ComplexTensor3 &t)
{
    auto os = open_out(path);
    write_tensor(os, t);
}

std::variant<RealTensor3, ComplexTensor3> read_tensor(std::istream &is)
{
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic)
        throw DataError("MMT3: bad magic");
    char kind = 0;
    if (!is.read(&kind, 1))
        throw DataError("MMT3: truncated header");
    Dims3 d{};
    d.d1 = get_u64(is);
    d.d2 = get_u64(is);
    d.d3 = get_u64(is);
    if (d.d1 == 0 || d.d2 == 0 || d.d3 == 0)
        throw DataError("MMT3: zero dimension");
    // Reject absurd headers before allocating.
    constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;
    if (d.d1 > kMaxElements / d.d2 || d.d1 * d.d2 > kMaxElements / d.d3)
        throw DataError("MMT3: dims too large");

    switch (static_cast<ElementKind>(kind))
    {
    case ElementKind::Real64: {
        std::vector<double> values(d.size());
        get_doubles(is, values.data(), values.size());
        return RealTensor3(d, std::move(values));
    }
    case ElementKind::Complex128: {
        std::vector<cdouble> values(d.size());
        get_doubles(is, reinterpret_cast<double *>(values.data()), 2 * values.size());
        return ComplexTensor3(d, std::move(values));
    }
    }
    throw DataError("MMT3: unknown element kind " + std::to_string(static_cast<int>(kind)));
}

std::variant<RealTensor3, ComplexTensor3> read_tensor(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DataError("cannot open " + path.string());
    return read_tensor(is);
}

ComplexTensor3 read_complex_tensor(const std::filesystem::path &path)
{
    auto v = read_tensor(path);
    if (auto *c = std::get_if<ComplexTensor3>(&v))
        return std::move(*c);
    throw DataError(path.string() + ": expected a complex128 tensor");
}

RealTensor3 read_real_tensor(const std::filesystem::path &path)
{
    auto v = read_tensor(path);
    if (auto *r = std::get_if<RealTensor3>(&v))
        return std::move(*r);
    throw DataError(path.string() + ": expected a real64 tensor");
}

} // namespace mmsense::io
