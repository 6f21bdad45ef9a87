// Copyright 2026 The qwalk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qwalk::cli {

/// Parses "0.5pi", "pi", "-pi/4" style multiples of pi, or plain radians.
double parse_angle(const std::string& text);

/// Entry point of the `qwalk` executable. `args` excludes the program name.
/// Returns the process exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qwalk::cli
