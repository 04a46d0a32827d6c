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

#ifndef BYOLA_CHECKPOINT_H_
#define BYOLA_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "byola/byol_trainer.h"
#include "byola/dsp_features.h"

namespace byola {

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  MelConfig mel;
  NormStats stats;
  ByolState state;
  uint64_t seed = 0;
  int segment_frames = 100;
};

// Layout: "BYLC", u32 version, then named arrays (u16 name length, name,
// u8 dtype {0 = f32, 1 = f64}, u8 rank, u32 dims, payload), then a CRC32 of
// every preceding byte. All integers and payloads little-endian.
std::vector<uint8_t> SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DeserializeCheckpoint(const std::vector<uint8_t>& bytes);

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
// Throws CheckpointError (version, truncation, checksum, ...).
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace byola

#endif  // BYOLA_CHECKPOINT_H_
