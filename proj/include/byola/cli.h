// Copyright 2026 The byola-speaker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BYOLA_CLI_H_
#define BYOLA_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "byola/audio_io.h"
#include "byola/dsp_features.h"

namespace byola {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitDataError = 2 };

// Runs one subcommand: synth-corpus, featstats, train, embed, eval-s2t,
// eval-mcd or augment. Usage problems go to `err` with exit code 1; library
// errors are reported on `err` with exit code 2.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

// Sorted *.wav files anywhere under `dir`.
std::vector<std::string> ListWavFiles(const std::string& dir);

// Streams every listed file through the extractor; all files must share the
// configured rate after resampling.
NormStats ComputeNormStatsFromFiles(const std::vector<std::string>& paths,
                                    const MelConfig& mel);

}  // namespace byola

#endif  // BYOLA_CLI_H_
