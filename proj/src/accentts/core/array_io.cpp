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

#include "accentts/core/array_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace accentts {

static_assert(std::endian::native == std::endian::little,
              "array files are little-endian; byte swapping is not implemented");

namespace {

std::vector<float> ToF32(const Matrix& m) {
  std::vector<float> buf(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.raw()[i]);
  return buf;
}

}  // namespace

void WriteF32Array(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  nlohmann::json header = {{"rows", m.rows()}, {"cols", m.cols()}};
  out << header.dump() << "\n";
  const std::vector<float> buf = ToF32(m);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix ReadF32Array(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw std::runtime_error("missing header: " + path);
  nlohmann::json header = nlohmann::json::parse(header_line, nullptr, false);
  if (header.is_discarded() || !header.contains("rows") || !header.contains("cols")) {
    throw std::runtime_error("bad array header in " + path);
  }
  const int rows = header["rows"].get<int>();
  const int cols = header["cols"].get<int>();
  if (rows < 0 || cols < 0) throw std::runtime_error("bad array shape in " + path);
  std::vector<float> buf(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float)) {
    throw std::runtime_error("truncated array file: " + path);
  }
  std::vector<double> vals(buf.begin(), buf.end());
  return Matrix::FromRows(rows, cols, std::move(vals));
}

void WriteF32Raw(const std::string& path, const std::vector<const Matrix*>& arrays) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const Matrix* m : arrays) {
    const std::vector<float> buf = ToF32(*m);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<float> ReadF32Raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open: " + path);
  const std::streamsize bytes = in.tellg();
  if (bytes % sizeof(float) != 0) {
    throw std::runtime_error("raw float file has odd length: " + path);
  }
  in.seekg(0);
  std::vector<float> buf(static_cast<std::size_t>(bytes) / sizeof(float));
  in.read(reinterpret_cast<char*>(buf.data()), bytes);
  if (!in) throw std::runtime_error("read failed: " + path);
  return buf;
}

}  // namespace accentts
