// Copyright 2026 The rxanon Authors
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

#ifndef RXANON_TEXT_H_
#define RXANON_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rxanon {

std::string_view Trim(std::string_view s);

// ASCII case folding; bytes >= 0x80 are left untouched.
std::string ToLowerAscii(std::string_view s);
bool EqualsIgnoreCase(std::string_view a, std::string_view b);

// Byte offset of every code point boundary of a UTF-8 string: element i is
// the byte offset of code point i, and the final element is s.size(), so
// the result has (code point count + 1) entries. Returns nullopt on
// malformed UTF-8.
std::optional<std::vector<size_t>> CodePointOffsets(std::string_view s);

// True if `needle` occurs in `haystack` bounded on both sides by a
// non-alphanumeric character or the string edge.
bool ContainsToken(std::string_view haystack, std::string_view needle);

std::vector<std::string> SplitString(std::string_view s, char sep);

// Shortest round-trip decimal form in fixed notation (never an exponent);
// integral values print without a fractional part.
std::string FormatNumber(double value);

}  // namespace rxanon

#endif  // RXANON_TEXT_H_
