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

#include "fep/data.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fep/dct.h"
#include "fep/error.h"
#include "fep/tensor_io.h"

namespace fep {
namespace {

constexpr int kMaxStartRetries = 10000;

struct Velocity {
  int dh;
  int dw;
};

Velocity VelocityOf(Motion m) {
  switch (m) {
    case Motion::kRight: return {0, 1};
    case Motion::kLeft: return {0, -1};
    case Motion::kDown: return {1, 0};
    case Motion::kUp: return {-1, 0};
  }
  return {0, 0};
}

double DistractorSign(Motion m, std::size_t t, std::size_t h, std::size_t w) {
  std::size_t parity = 0;
  switch (m) {
    case Motion::kRight: parity = h + w; break;
    case Motion::kLeft: parity = h + w + t; break;
    case Motion::kDown: parity = h; break;
    case Motion::kUp: parity = w; break;
  }
  return parity % 2 == 0 ? 1.0 : -1.0;
}

}  // namespace

std::string_view MotionName(Motion m) {
  switch (m) {
    case Motion::kRight: return "right";
    case Motion::kLeft: return "left";
    case Motion::kDown: return "down";
    case Motion::kUp: return "up";
  }
  return "?";
}

void SyntheticSpec::Validate() const {
  shape.Validate();
  if (blob_size == 0) throw ConfigError("SyntheticSpec: blob_size must be >= 1");
  if (blob_size + shape.t - 1 > shape.h || blob_size + shape.t - 1 > shape.w) {
    throw ConfigError("SyntheticSpec: a " + std::to_string(blob_size) +
                      "px blob cannot move " + std::to_string(shape.t - 1) +
                      "px inside a " + std::to_string(shape.h) + "x" +
                      std::to_string(shape.w) + " frame");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("SyntheticSpec: noise_sigma must be >= 0");
  }
  if (!std::isfinite(blob_intensity) || !std::isfinite(hf_amplitude)) {
    throw ConfigError("SyntheticSpec: intensities must be finite");
  }
}

SyntheticSpec DeskSyntheticSpec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  return spec;
}

SyntheticSpec DistractorSyntheticSpec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.noise_sigma = 0.05;
  spec.hf_amplitude = 0.3;
  spec.seed = seed;
  return spec;
}

LabeledClip GenerateClip(const SyntheticSpec& spec, std::size_t index) {
  spec.Validate();
  const ClipShape& cs = spec.shape;
  std::mt19937_64 rng(spec.seed + index);
  const Motion motion = static_cast<Motion>(index % kNumMotions);
  const Velocity v = VelocityOf(motion);
  const long long span_t = static_cast<long long>(cs.t) - 1;
  const long long s = static_cast<long long>(spec.blob_size);
  const long long H = static_cast<long long>(cs.h);
  const long long W = static_cast<long long>(cs.w);

  std::uniform_int_distribution<long long> pick_h(0, H - s);
  std::uniform_int_distribution<long long> pick_w(0, W - s);
  long long h0 = 0, w0 = 0;
  int tries = 0;
  for (;; ++tries) {
    if (tries == kMaxStartRetries) {
      throw ConfigError("GenerateClip: no start position keeps the blob in "
                        "frame");
    }
    h0 = pick_h(rng);
    w0 = pick_w(rng);
    const long long h_end = h0 + v.dh * span_t;
    const long long w_end = w0 + v.dw * span_t;
    if (h_end >= 0 && h_end <= H - s && w_end >= 0 && w_end <= W - s) break;
  }

  LabeledClip out;
  out.label = static_cast<std::size_t>(motion);
  out.clip = Tensor(cs.clip());
  out.boxes = Tensor(cs.volume());
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  auto x = out.clip.mutable_values();
  if (spec.noise_sigma > 0.0) {
    for (double& value : x) value = noise(rng);
  }
  for (std::size_t t = 0; t < cs.t; ++t) {
    const long long bh = h0 + v.dh * static_cast<long long>(t);
    const long long bw = w0 + v.dw * static_cast<long long>(t);
    for (std::size_t c = 0; c < cs.c; ++c) {
      for (std::size_t h = 0; h < cs.h; ++h) {
        for (std::size_t w = 0; w < cs.w; ++w) {
          double& value = x[((t * cs.c + c) * cs.h + h) * cs.w + w];
          if (spec.hf_amplitude != 0.0) {
            value += spec.hf_amplitude * DistractorSign(motion, t, h, w);
          }
          const long long hh = static_cast<long long>(h);
          const long long ww = static_cast<long long>(w);
          if (hh >= bh && hh < bh + s && ww >= bw && ww < bw + s) {
            value += spec.blob_intensity;
            out.boxes.at(t, h, w) = 1.0;
          }
        }
      }
    }
  }
  return out;
}

std::vector<LabeledClip> GenerateDataset(const SyntheticSpec& spec,
                                         std::size_t n) {
  if (n == 0) throw ConfigError("GenerateDataset: n must be >= 1");
  spec.Validate();
  std::vector<LabeledClip> clips;
  clips.reserve(n);
  for (std::size_t i = 0; i < n; ++i) clips.push_back(GenerateClip(spec, i));
  return clips;
}

std::vector<std::uint8_t> DatasetToBytes(std::span<const LabeledClip> clips) {
  ByteWriter w;
  w.Magic("FEPD");
  w.U8(kDatasetFormatVersion);
  w.U32(static_cast<std::uint32_t>(clips.size()));
  for (const LabeledClip& c : clips) {
    w.U32(static_cast<std::uint32_t>(c.label));
    EncodeTensor(c.boxes, w);
    EncodeTensor(c.clip, w);
  }
  return w.bytes();
}

std::vector<LabeledClip> DatasetFromBytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic("FEPD");
  const std::size_t version_at = r.offset();
  const std::uint8_t version = r.U8();
  if (version != kDatasetFormatVersion) {
    throw FormatError("unsupported FEPD version " + std::to_string(version),
                      version_at);
  }
  const std::uint32_t count = r.U32();
  std::vector<LabeledClip> clips;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t clip_at = r.offset();
    LabeledClip c;
    c.label = r.U32();
    c.boxes = DecodeTensor(r);
    c.clip = DecodeTensor(r);
    if (c.clip.rank() != 4 ||
        c.boxes.shape() != ClipShape::FromClip(c.clip.shape()).volume()) {
      throw FormatError("FEPD clip " + std::to_string(i) +
                        " has inconsistent clip/box shapes",
                        clip_at);
    }
    clips.push_back(std::move(c));
  }
  r.ExpectEnd();
  return clips;
}

void SaveDataset(std::span<const LabeledClip> clips,
                 const std::filesystem::path& path) {
  WriteFileBytes(path, DatasetToBytes(clips));
}

std::vector<LabeledClip> LoadDataset(const std::filesystem::path& path) {
  return DatasetFromBytes(ReadFileBytes(path));
}

namespace {

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(
      std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

void WritePgm(const std::filesystem::path& path, std::size_t h, std::size_t w,
              const std::vector<std::uint8_t>& pixels) {
  const std::string header =
      "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  WriteFileBytes(path, bytes);
}

}  // namespace

std::vector<std::filesystem::path> ExportHeatmapFrames(
    const Tensor& clip, const Tensor& mask, const std::filesystem::path& dir) {
  const ClipShape cs = ClipShape::FromClip(clip.shape());
  const Tensor m = mask.Reshape(VolumeDims::FromShape(mask.shape()).shape());
  if (m.shape() != cs.volume()) {
    throw ShapeError("ExportHeatmapFrames: mask " + ShapeString(mask.shape()) +
                     " does not match clip " + ShapeString(clip.shape()));
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("ExportHeatmapFrames: cannot create directory '" +
                  dir.string() + "'");
  }

  const Tensor gray = Scale(ReduceChannels(clip), 1.0 / static_cast<double>(cs.c));
  const auto [lo_it, hi_it] =
      std::minmax_element(gray.values().begin(), gray.values().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  auto normalized = [&](std::size_t i) {
    return range > 0.0 ? (gray[i] - lo) / range : 0.0;
  };

  const int width = std::max<int>(3, static_cast<int>(std::to_string(cs.t).size()));
  const std::size_t plane = cs.h * cs.w;
  std::vector<std::filesystem::path> written;
  std::vector<std::uint8_t> clip_px(plane), mask_px(plane), overlay_px(plane);
  for (std::size_t t = 0; t < cs.t; ++t) {
    for (std::size_t p = 0; p < plane; ++p) {
      const double c = normalized(t * plane + p);
      const double mv = std::clamp(m[t * plane + p], 0.0, 1.0);
      clip_px[p] = ToByte(c);
      mask_px[p] = ToByte(mv);
      overlay_px[p] = ToByte(0.5 * c + 0.5 * mv);
    }
    std::string index = std::to_string(t);
    index.insert(0, static_cast<std::size_t>(width) - std::min<std::size_t>(
                                                       width, index.size()),
                 '0');
    for (const auto& [name, px] :
         {std::pair{"clip_", &clip_px}, std::pair{"mask_", &mask_px},
          std::pair{"overlay_", &overlay_px}}) {
      const auto path = dir / (std::string(name) + index + ".pgm");
      WritePgm(path, cs.h, cs.w, *px);
      written.push_back(path);
    }
  }
  return written;
}

TemplateModel BuildMotionTemplateModel(const ClipShape& shape,
                                       double temperature) {
  shape.Validate();
  const std::size_t T = shape.t, H = shape.h, W = shape.w;
  std::vector<Tensor> templates;
  for (std::size_t m = 0; m < kNumMotions; ++m) {
    Tensor tpl(shape.clip());
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t w = 0; w < W; ++w) {
          bool in_band = false;
          switch (static_cast<Motion>(m)) {
            case Motion::kRight: in_band = w >= t && w + T <= t + W; break;
            case Motion::kLeft: in_band = w + t + 1 >= T && w + t < W; break;
            case Motion::kDown: in_band = h >= t && h + T <= t + H; break;
            case Motion::kUp: in_band = h + t + 1 >= T && h + t < H; break;
          }
          if (!in_band) continue;
          for (std::size_t c = 0; c < shape.c; ++c) tpl.at(t, c, h, w) = 1.0;
        }
      }
    }
    templates.push_back(std::move(tpl));
  }
  return TemplateModel(shape, std::move(templates),
                       std::vector<double>(kNumMotions, 0.0), temperature);
}

}  // namespace fep
