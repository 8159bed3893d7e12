// Copyright (c) 2026 The accentts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ACCENTTS_CORE_ARRAY_IO_HPP_
#define ACCENTTS_CORE_ARRAY_IO_HPP_

#include <string>

#include "accentts/core/matrix.hpp"

namespace accentts {

// Feature array file format: one JSON header line {"rows":R,"cols":C}
// followed by R*C little-endian float32 values in row-major order.
void WriteF32Array(const std::string& path, const Matrix& m);
Matrix ReadF32Array(const std::string& path);

// Raw body without header, used inside checkpoint directories where the
// meta file carries the shapes.
void WriteF32Raw(const std::string& path, const std::vector<const Matrix*>& arrays);
std::vector<float> ReadF32Raw(const std::string& path);

}  // namespace accentts

#endif  // ACCENTTS_CORE_ARRAY_IO_HPP_
