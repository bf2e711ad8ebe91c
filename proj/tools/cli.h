// Copyright 2026 The lexsum Authors.
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


// Entry point of the lexsum command-line tool, callable from tests.

#ifndef LEXSUM_TOOLS_CLI_H_
#define LEXSUM_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace lexsum::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitTransport = 3;

/// Runs one subcommand. Diagnostics go to stderr; the return value is the
/// process exit code.
int run(int argc, const char* const* argv);
/// Same, with args[0] as the program name.
int run(const std::vector<std::string>& args);

}  // namespace lexsum::cli

#endif  // LEXSUM_TOOLS_CLI_H_
