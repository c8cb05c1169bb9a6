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

#ifndef RXANON_CSV_H_
#define RXANON_CSV_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace rxanon {

using CsvRecord = std::vector<std::string>;

// RFC 4180 reader: comma separated, double-quote escaping, quoted fields may
// span lines. Accepts LF and CRLF line endings and skips a UTF-8 BOM. Throws
// ValidationError on an unterminated quote.
std::vector<CsvRecord> ParseCsv(std::string_view content);
std::vector<CsvRecord> ReadCsvFile(const std::string& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string EscapeCsvField(std::string_view field);
void WriteCsvRecord(std::ostream& out, const CsvRecord& record);

}  // namespace rxanon

#endif  // RXANON_CSV_H_
