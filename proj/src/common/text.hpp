// Copyright 2026 The Previz Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace previz::text {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::string_view trim(std::string_view s);

// Splits on runs of spaces/tabs. Double-quoted tokens may contain blanks and
// the escapes \" and \\.
std::vector<std::string> tokenize(std::string_view line);

// Quotes a string so tokenize() returns it unchanged.
std::string quote(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace previz::text
