// Copyright 2026 The VR3Dense Authors
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

#include "vr3dense/kitti_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace vr3dense {

namespace {

float read_le_float(const std::uint8_t* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  float value;
  std::memcpy(&value, &bits, sizeof(value));
  return value;
}

void append_le_float(std::vector<std::uint8_t>& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  out.push_back(static_cast<std::uint8_t>(bits & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xff));
}

double parse_double_field(const std::string& token, int field_index) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw FormatError("label: non-numeric value at field " + std::to_string(field_index));
  }
  if (consumed != token.size()) {
    throw FormatError("label: non-numeric value at field " + std::to_string(field_index));
  }
  return value;
}

std::vector<std::string> split_whitespace(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream stream(line);
  std::string token;
  while (stream >> token) {
    tokens.push_back(token);
  }
  return tokens;
}

std::string format_fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

PointCloud read_point_cloud(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    const std::size_t offset = (bytes.size() / kRecord) * kRecord;
    throw FormatError("point cloud: truncated record at byte offset " + std::to_string(offset));
  }
  PointCloud cloud;
  cloud.points.reserve(bytes.size() / kRecord);
  for (std::size_t i = 0; i < bytes.size(); i += kRecord) {
    LidarPoint p;
    p.x = read_le_float(bytes.data() + i);
    p.y = read_le_float(bytes.data() + i + 4);
    p.z = read_le_float(bytes.data() + i + 8);
    p.intensity = read_le_float(bytes.data() + i + 12);
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw FormatError("point cloud: non-finite coordinate at byte offset " + std::to_string(i));
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

std::vector<std::uint8_t> write_point_cloud(const PointCloud& cloud) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(cloud.points.size() * 16);
  for (const LidarPoint& p : cloud.points) {
    append_le_float(bytes, p.x);
    append_le_float(bytes, p.y);
    append_le_float(bytes, p.z);
    append_le_float(bytes, p.intensity);
  }
  return bytes;
}

ObjectLabel parse_label_line(const std::string& line) {
  const std::vector<std::string> tokens = split_whitespace(line);
  if (tokens.size() < 15) {
    throw FormatError("label: expected at least 15 fields, missing field " +
                      std::to_string(tokens.size() + 1));
  }
  ObjectLabel label;
  label.class_name = tokens[0];
  label.truncated = parse_double_field(tokens[1], 2);
  label.occluded = static_cast<int>(parse_double_field(tokens[2], 3));
  label.alpha = parse_double_field(tokens[3], 4);
  label.bbox_left = parse_double_field(tokens[4], 5);
  label.bbox_top = parse_double_field(tokens[5], 6);
  label.bbox_right = parse_double_field(tokens[6], 7);
  label.bbox_bottom = parse_double_field(tokens[7], 8);
  label.height = parse_double_field(tokens[8], 9);
  label.width = parse_double_field(tokens[9], 10);
  label.length = parse_double_field(tokens[10], 11);
  label.x = parse_double_field(tokens[11], 12);
  label.y = parse_double_field(tokens[12], 13);
  label.z = parse_double_field(tokens[13], 14);
  label.rotation_y = parse_double_field(tokens[14], 15);
  // A 16th score field, when present, is ignored on read.
  return label;
}

std::vector<ObjectLabel> parse_labels(const std::string& text) {
  std::vector<ObjectLabel> labels;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    if (split_whitespace(line).empty()) {
      continue;
    }
    labels.push_back(parse_label_line(line));
  }
  return labels;
}

std::string format_label_line(const ObjectLabel& label, std::optional<double> score) {
  std::ostringstream out;
  out << label.class_name << ' ' << format_fixed2(label.truncated) << ' ' << label.occluded << ' '
      << format_fixed2(label.alpha) << ' ' << format_fixed2(label.bbox_left) << ' '
      << format_fixed2(label.bbox_top) << ' ' << format_fixed2(label.bbox_right) << ' '
      << format_fixed2(label.bbox_bottom) << ' ' << format_fixed2(label.height) << ' '
      << format_fixed2(label.width) << ' ' << format_fixed2(label.length) << ' '
      << format_fixed2(label.x) << ' ' << format_fixed2(label.y) << ' ' << format_fixed2(label.z) << ' '
      << format_fixed2(label.rotation_y);
  if (score.has_value()) {
    out << ' ' << format_fixed2(*score);
  }
  return out.str();
}

Calibration Calibration::identity(double focal_px, double cx, double cy, double baseline_m) {
  Calibration calib;
  calib.P2 << focal_px, 0, cx, 0, 0, focal_px, cy, 0, 0, 0, 1, 0;
  calib.R0_rect = Eigen::Matrix3d::Identity();
  calib.Tr_velo_to_cam << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
  calib.focal = focal_px;
  calib.baseline = baseline_m;
  return calib;
}

Calibration parse_calib(const std::string& text, double default_baseline) {
  std::map<std::string, std::vector<double>> entries;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      continue;
    }
    const std::string key = line.substr(0, colon);
    std::vector<double> values;
    std::istringstream rest(line.substr(colon + 1));
    double v = 0.0;
    while (rest >> v) {
      values.push_back(v);
    }
    entries[key] = values;
  }

  auto require = [&](const std::string& key, std::size_t count) -> const std::vector<double>& {
    auto it = entries.find(key);
    if (it == entries.end()) {
      throw FormatError("calib: missing key " + key);
    }
    if (it->second.size() != count) {
      throw FormatError("calib: key " + key + " expects " + std::to_string(count) + " values, got " +
                        std::to_string(it->second.size()));
    }
    return it->second;
  };

  Calibration calib;
  const std::vector<double>& p2 = require("P2", 12);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      calib.P2(r, c) = p2[static_cast<std::size_t>(r * 4 + c)];
    }
  }
  const std::vector<double>& r0 = require("R0_rect", 9);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      calib.R0_rect(r, c) = r0[static_cast<std::size_t>(r * 3 + c)];
    }
  }
  const std::vector<double>& tr = require("Tr_velo_to_cam", 12);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      calib.Tr_velo_to_cam(r, c) = tr[static_cast<std::size_t>(r * 4 + c)];
    }
  }

  calib.focal = calib.P2(0, 0);
  if (!(calib.focal > 0.0)) {
    throw FormatError("calib: P2 focal length must be positive");
  }

  if (entries.count("P3") != 0) {
    const std::vector<double>& p3 = require("P3", 12);
    calib.baseline = (calib.P2(0, 3) - p3[3]) / calib.P2(0, 0);
  } else {
    calib.baseline = default_baseline;
  }
  if (!(calib.baseline > 0.0)) {
    throw FormatError("calib: derived baseline must be positive");
  }

  const Eigen::Matrix3d gram = calib.R0_rect.transpose() * calib.R0_rect;
  const double deviation = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (deviation >= 1e-3) {
    throw FormatError("calib: R0_rect is not orthonormal");
  }
  return calib;
}

namespace {

class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) {
      throw FormatError("image: truncated header");
    }
    std::string m(reinterpret_cast<const char*>(bytes_.data()), 2);
    pos_ = 2;
    return m;
  }

  // Header integers are separated by whitespace; '#' starts a comment.
  int header_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw FormatError("image: malformed header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1 << 30) {
        throw FormatError("image: header value out of range");
      }
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates the header from the payload.
  const std::uint8_t* payload(std::size_t expected_size) {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError("image: malformed header");
    }
    ++pos_;
    if (bytes_.size() - pos_ < expected_size) {
      throw FormatError("image: truncated payload");
    }
    return bytes_.data() + pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

struct PnmHeader {
  bool color = false;
  Index width = 0;
  Index height = 0;
  int maxval = 0;
  const std::uint8_t* payload = nullptr;
};

PnmHeader parse_pnm(const std::vector<std::uint8_t>& bytes, PnmReader& reader) {
  PnmHeader header;
  const std::string magic = reader.magic();
  if (magic == "P6") {
    header.color = true;
  } else if (magic == "P5") {
    header.color = false;
  } else {
    throw FormatError("image: unsupported magic number " + magic);
  }
  header.width = reader.header_int();
  header.height = reader.header_int();
  header.maxval = reader.header_int();
  if (header.width < 1 || header.height < 1) {
    throw FormatError("image: degenerate dimensions");
  }
  if (header.maxval < 1 || header.maxval > 65535) {
    throw FormatError("image: unsupported maxval " + std::to_string(header.maxval));
  }
  if (header.color && header.maxval > 255) {
    throw FormatError("image: PPM payloads must be 8-bit");
  }
  const std::size_t bytes_per_sample = header.maxval > 255 ? 2 : 1;
  const std::size_t channels = header.color ? 3 : 1;
  const std::size_t expected = static_cast<std::size_t>(header.width) *
                               static_cast<std::size_t>(header.height) * channels * bytes_per_sample;
  header.payload = reader.payload(expected);
  (void)bytes;
  return header;
}

// 16-bit samples are big-endian per the netpbm convention.
std::uint32_t read_sample(const std::uint8_t*& p, bool wide) {
  if (wide) {
    const std::uint32_t v = (static_cast<std::uint32_t>(p[0]) << 8) | p[1];
    p += 2;
    return v;
  }
  return *p++;
}

void append_sample(std::vector<std::uint8_t>& out, std::uint32_t v, bool wide) {
  if (wide) {
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  }
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

std::uint32_t quantize(double value, int maxval) {
  const double scaled = std::floor(value * maxval + 0.5);  // round half up
  if (scaled < 0.0) {
    return 0;
  }
  if (scaled > maxval) {
    return static_cast<std::uint32_t>(maxval);
  }
  return static_cast<std::uint32_t>(scaled);
}

std::vector<std::uint8_t> pnm_header_bytes(const char* magic, Index width, Index height, int maxval) {
  std::ostringstream out;
  out << magic << "\n" << width << " " << height << "\n" << maxval << "\n";
  const std::string s = out.str();
  return {s.begin(), s.end()};
}

}  // namespace

ImageGrid decode_image(const std::vector<std::uint8_t>& bytes) {
  PnmReader reader(bytes);
  const PnmHeader header = parse_pnm(bytes, reader);
  const bool wide = header.maxval > 255;
  const Index channels = header.color ? 3 : 1;
  ImageGrid img(header.height, header.width, channels);
  const std::uint8_t* p = header.payload;
  for (Index r = 0; r < header.height; ++r) {
    for (Index c = 0; c < header.width; ++c) {
      for (Index ch = 0; ch < channels; ++ch) {
        img(r, c, ch) = static_cast<double>(read_sample(p, wide)) / header.maxval;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageGrid& img) {
  if (img.channels() != 3) {
    throw ParameterError("encode_ppm: image must have 3 channels");
  }
  std::vector<std::uint8_t> bytes = pnm_header_bytes("P6", img.width(), img.height(), 255);
  bytes.reserve(bytes.size() + static_cast<std::size_t>(img.size()));
  for (Index r = 0; r < img.height(); ++r) {
    for (Index c = 0; c < img.width(); ++c) {
      for (Index ch = 0; ch < 3; ++ch) {
        append_sample(bytes, quantize(img(r, c, ch), 255), false);
      }
    }
  }
  return bytes;
}

std::vector<std::uint8_t> encode_pgm(const ImageGrid& img, int maxval) {
  if (img.channels() != 1) {
    throw ParameterError("encode_pgm: image must have 1 channel");
  }
  if (maxval != 255 && maxval != 65535) {
    throw ParameterError("encode_pgm: maxval must be 255 or 65535");
  }
  const bool wide = maxval > 255;
  std::vector<std::uint8_t> bytes = pnm_header_bytes("P5", img.width(), img.height(), maxval);
  for (Index r = 0; r < img.height(); ++r) {
    for (Index c = 0; c < img.width(); ++c) {
      append_sample(bytes, quantize(img(r, c), maxval), wide);
    }
  }
  return bytes;
}

ImageGrid decode_depth_pgm(const std::vector<std::uint8_t>& bytes, double scale) {
  if (!(scale > 0.0)) {
    throw ParameterError("decode_depth_pgm: scale must be positive");
  }
  PnmReader reader(bytes);
  const PnmHeader header = parse_pnm(bytes, reader);
  if (header.color) {
    throw FormatError("depth: expected PGM, got PPM");
  }
  const bool wide = header.maxval > 255;
  ImageGrid depth(header.height, header.width, 1);
  const std::uint8_t* p = header.payload;
  for (Index r = 0; r < header.height; ++r) {
    for (Index c = 0; c < header.width; ++c) {
      depth(r, c) = static_cast<double>(read_sample(p, wide)) / scale;
    }
  }
  return depth;
}

std::vector<std::uint8_t> encode_depth_pgm(const ImageGrid& depth, double scale) {
  if (depth.channels() != 1) {
    throw ParameterError("encode_depth_pgm: depth must have 1 channel");
  }
  if (!(scale > 0.0)) {
    throw ParameterError("encode_depth_pgm: scale must be positive");
  }
  std::vector<std::uint8_t> bytes = pnm_header_bytes("P5", depth.width(), depth.height(), 65535);
  for (Index r = 0; r < depth.height(); ++r) {
    for (Index c = 0; c < depth.width(); ++c) {
      const double counts = std::floor(depth(r, c) * scale + 0.5);
      const double clamped = std::min(std::max(counts, 0.0), 65535.0);
      append_sample(bytes, static_cast<std::uint32_t>(clamped), true);
    }
  }
  return bytes;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw FormatError("cannot open file: " + path);
  }
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw FormatError("cannot open file for writing: " + path);
  }
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw FormatError("cannot open file: " + path);
  }
  std::ostringstream out;
  out << file.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream file(path);
  if (!file) {
    throw FormatError("cannot open file for writing: " + path);
  }
  file << text;
}

}  // namespace vr3dense
