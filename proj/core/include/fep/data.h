// Copyright 2026 The fep Authors
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

#ifndef FEP_DATA_H_
#define FEP_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "fep/models.h"
#include "fep/tensor.h"

namespace fep {

// Class indices of the synthetic dataset: direction of blob motion.
enum class Motion : std::size_t { kRight = 0, kLeft = 1, kDown = 2, kUp = 3 };
inline constexpr std::size_t kNumMotions = 4;

std::string_view MotionName(Motion m);

// A bright square blob moving one pixel per frame over optional Gaussian
// noise and an optional label-dependent high-frequency pattern.
struct SyntheticSpec {
  ClipShape shape{8, 1, 16, 16};
  std::size_t blob_size = 4;
  double blob_intensity = 1.0;
  double noise_sigma = 0.0;
  // Amplitude of the per-class high-frequency distractor:
  //   right (-1)^(h+w), left (-1)^(h+w+t), down (-1)^h, up (-1)^w.
  double hf_amplitude = 0.0;
  std::uint64_t seed = 0;

  // Throws ConfigError if the blob cannot travel T-1 pixels inside a frame.
  void Validate() const;
};

// Noiseless 8 x 1 x 16 x 16 preset.
SyntheticSpec DeskSyntheticSpec(std::uint64_t seed = 0);
// Desk preset with mild noise and the high-frequency distractor enabled.
SyntheticSpec DistractorSyntheticSpec(std::uint64_t seed = 0);

struct LabeledClip {
  Tensor clip;   // T x C x H x W
  std::size_t label = 0;
  Tensor boxes;  // T x H x W, 1 inside the blob's box

  friend bool operator==(const LabeledClip&, const LabeledClip&) = default;
};

// Clip i has label i mod 4 and is drawn from its own generator seeded with
// spec.seed + i, so the dataset is reproducible clip by clip.
std::vector<LabeledClip> GenerateDataset(const SyntheticSpec& spec,
                                         std::size_t n);
LabeledClip GenerateClip(const SyntheticSpec& spec, std::size_t index);

// FEPD: "FEPD", u8 version, u32 count, then per clip u32 label, boxes FEPT,
// clip FEPT.
inline constexpr std::uint8_t kDatasetFormatVersion = 1;

std::vector<std::uint8_t> DatasetToBytes(std::span<const LabeledClip> clips);
std::vector<LabeledClip> DatasetFromBytes(std::span<const std::uint8_t> bytes);
void SaveDataset(std::span<const LabeledClip> clips,
                 const std::filesystem::path& path);
std::vector<LabeledClip> LoadDataset(const std::filesystem::path& path);

// Writes clip_NNN.pgm, mask_NNN.pgm and overlay_NNN.pgm (binary P5) for every
// frame. The clip is averaged over channels and min-max normalized over the
// whole clip; overlay = 0.5 * clip + 0.5 * mask. Returns the written paths.
std::vector<std::filesystem::path> ExportHeatmapFrames(
    const Tensor& clip, const Tensor& mask, const std::filesystem::path& dir);

// Matched filters for the four motion classes. Template y is 1 on the
// space-time band that a class-y blob can occupy at each frame (e.g. for
// "right", columns t .. t + W - T of frame t) and 0 elsewhere.
TemplateModel BuildMotionTemplateModel(const ClipShape& shape,
                                       double temperature);

inline constexpr double kDeskTemplateTemperature = 0.5;

}  // namespace fep

#endif  // FEP_DATA_H_
