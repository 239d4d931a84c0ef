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

#include "mmsense/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace mmsense::simd
{

#if defined(MMSENSE_HAVE_AVX2)
namespace avx2
{
const KernelTable &table();
}
#endif

std::string_view to_string(Isa isa)
{
    switch (isa)
    {
    case Isa::Scalar:
        return "scalar";
    case Isa::Avx2:
        return "avx2";
    }
    return "unknown";
}

const KernelTable *avx2_kernels()
{
#if defined(MMSENSE_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    return supported ? &avx2::table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable &active()
{
    static const KernelTable &selected = []() -> const KernelTable & {
        if (const char *env = std::getenv("MMSENSE_SIMD"); env != nullptr && std::string(env) == "scalar")
            return scalar_kernels();
        if (const KernelTable *t = avx2_kernels())
            return *t;
        return scalar_kernels();
    }();
    return selected;
}

} // namespace mmsense::simd
