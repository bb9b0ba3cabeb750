/*
 * Copyright 2026 The cxrprep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cxrprep::csv {

// One parsed data row together with its 1-based line number in the source.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// A comma-separated table. Lines starting with '#' before the header are
// collected as metadata comments; blank lines are ignored.
struct Table {
  std::filesystem::path source;
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<Row> rows;

  // Column index by name, or -1.
  int column(std::string_view name) const;
};

// Splits one CSV line, honouring double-quoted fields with "" escapes.
// Returns false on an unterminated quote.
bool split_line(std::string_view line, std::vector<std::string>& out);

// Reads a whole table. Throws FileNotFound, or SchemaMismatch naming the file
// and line for malformed quoting or a row whose field count differs from
// the header.
Table read(const std::filesystem::path& path);

// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace cxrprep::csv
