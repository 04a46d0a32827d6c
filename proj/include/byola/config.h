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

#ifndef BYOLA_CONFIG_H_
#define BYOLA_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "byola/augmentation.h"
#include "byola/byol_trainer.h"
#include "byola/dsp_features.h"

namespace byola {

struct RunPaths {
  std::string manifest;
  std::string noise_dir;
  std::string stats;
  std::string checkpoint_dir;
  std::string log;
};

// Everything a training run needs. Seeds are never taken from the clock.
struct RunConfig {
  MelConfig mel;
  AugmentationPolicy augment;
  TrainConfig train;
  RunPaths paths;
  std::optional<uint64_t> seed;

  // Applies one `key = value` setting; throws DataError on an unknown key or
  // an unparsable value.
  void Set(const std::string& key, const std::string& value);

  // Throws DataError when the seed is missing, a referenced input path does
  // not exist, or any section is inconsistent.
  void Validate() const;
};

// Line-oriented `key = value` text with dotted prefixes (mel.*, augment.*,
// train.*, paths.*, seed). '#' starts a comment. Relative paths resolve
// against the file's directory.
RunConfig ParseRunConfig(const std::string& text, const std::string& base_dir = "");
RunConfig LoadRunConfig(const std::string& path);

}  // namespace byola

#endif  // BYOLA_CONFIG_H_
