// Copyright 2026 The PANDA Authors
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
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace panda::cli {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation; args excludes the program name.
/// Subcommands: nda, verify-theorem, simulate, sweep, world-make,
/// world-inspect, replay.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a comma-separated list of beta expressions: numbers or terms in r
/// ("r", "r/2", "r*0.5", "r+0.2", "r-0.1"). Throws ParseError.
std::vector<std::string> SplitList(std::string_view text);
double EvalBetaExpr(std::string_view expr, double r);

}  // namespace panda::cli
