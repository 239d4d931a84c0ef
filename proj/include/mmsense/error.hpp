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

#ifndef MMSENSE_ERROR_HPP
#define MMSENSE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mmsense
{

// Caller broke a documented precondition (shape mismatch, bad mode, ...).
class ContractError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Configuration or manifest rejected during validation.
class ValidationError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Input data is unusable: corrupt files, missing classes, I/O failures.
class DataError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A numeric procedure produced NaN/Inf or otherwise broke down.
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// An internal invariant does not hold; indicates a bug.
class InvariantError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

} // namespace mmsense

#endif
