// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#include "ccreg/volume_io.hpp"

#include "ccreg/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ccreg {
namespace {

using nlohmann::json;

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T, std::size_t N>
std::array<T, N> json_array(const json& j, const char* key, const std::filesystem::path& p) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N) {
    throw FormatError(p.string() + ": header field '" + key + "' must be an array of " + std::to_string(N));
  }
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = j[key][i].get<T>();
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("non-numeric landmark field '" + std::string(s) + "'", line);
  }
  return v;
}

}  // namespace

Volume3D load_volume(const std::filesystem::path& path) {
  json header;
  {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open volume header " + path.string());
    try {
      in >> header;
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": invalid JSON header: " + e.what());
    }
  }
  Grid g;
  try {
    g.dims = json_array<std::int64_t, 3>(header, "dims", path);
    const auto sp = json_array<double, 3>(header, "spacing", path);
    g.spacing = Vec3(sp[0], sp[1], sp[2]);
    if (header.contains("origin")) {
      const auto o = json_array<double, 3>(header, "origin", path);
      g.origin = Vec3(o[0], o[1], o[2]);
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": bad header value: " + e.what());
  }
  if (!header.contains("dtype") || !header["dtype"].is_string()) throw FormatError(path.string() + ": missing dtype");
  const std::string dt = header["dtype"].get<std::string>();
  DType dtype;
  if (dt == "float32") {
    dtype = DType::Float32;
  } else if (dt == "uint8") {
    dtype = DType::UInt8;
  } else {
    throw FormatError(path.string() + ": unknown dtype '" + dt + "'");
  }
  if (header.contains("order") && header["order"] != "z-major") {
    throw FormatError(path.string() + ": unsupported memory order");
  }
  std::filesystem::path payload = path;
  payload.replace_extension(".raw");
  if (header.contains("data")) payload = path.parent_path() / header["data"].get<std::string>();

  g.validate();
  const std::size_t n = g.voxel_count();
  const std::size_t bytes_per = dtype == DType::Float32 ? 4 : 1;
  const auto raw = read_bytes(payload);
  if (raw.size() != n * bytes_per) {
    throw IoError(payload.string() + ": expected " + std::to_string(n * bytes_per) + " bytes, found " +
                  std::to_string(raw.size()));
  }
  std::vector<float> data(n);
  if (dtype == DType::Float32) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u;
      std::memcpy(&u, raw.data() + 4 * i, 4);
      data[i] = std::bit_cast<float>(to_le(u));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<float>(static_cast<unsigned char>(raw[i]));
  }
  return Volume3D(g, dtype, std::move(data));
}

void save_volume(const Volume3D& v, const std::filesystem::path& path) {
  v.grid().validate();
  std::filesystem::path payload = path;
  payload.replace_extension(".raw");

  const Grid& g = v.grid();
  json header;
  header["dims"] = {g.dims[0], g.dims[1], g.dims[2]};
  header["spacing"] = {g.spacing[0], g.spacing[1], g.spacing[2]};
  header["origin"] = {g.origin[0], g.origin[1], g.origin[2]};
  header["dtype"] = std::string(dtype_name(v.dtype()));
  header["order"] = "z-major";
  header["data"] = payload.filename().string();

  std::string bytes;
  const auto data = v.data();
  if (v.dtype() == DType::Float32) {
    bytes.resize(data.size() * 4);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const std::uint32_t u = to_le(std::bit_cast<std::uint32_t>(data[i]));
      std::memcpy(bytes.data() + 4 * i, &u, 4);
    }
  } else {
    bytes.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) bytes[i] = static_cast<char>(static_cast<unsigned char>(data[i]));
  }

  {
    std::ofstream out(payload, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + payload.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + payload.string());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << header.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

LandmarkSet parse_landmarks(std::string_view text, LandmarkUnits units, const Grid& ref) {
  if (units == LandmarkUnits::VoxelIndex) ref.validate();
  LandmarkSet out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool any_label = false;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError("expected 3 numeric columns, found " + std::to_string(fields.size()) + " fields", line_no);
    }
    Vec3 p(parse_double(fields[0], line_no), parse_double(fields[1], line_no), parse_double(fields[2], line_no));
    if (!p.allFinite()) throw ParseError("non-finite landmark coordinate", line_no);
    if (units == LandmarkUnits::VoxelIndex) p = ref.index_to_world(p);
    out.points.push_back(p);
    std::string label;
    if (fields.size() == 4) {
      label = std::string(fields[3]);
      any_label = true;
    }
    out.labels.push_back(std::move(label));
  }
  if (!any_label) out.labels.clear();
  return out;
}

LandmarkSet load_landmarks(const std::filesystem::path& path, LandmarkUnits units, const Grid& ref) {
  const auto bytes = read_bytes(path);
  return parse_landmarks(std::string_view(bytes.data(), bytes.size()), units, ref);
}

void save_landmarks(const LandmarkSet& lm, const std::filesystem::path& path,
                    std::span<const std::string> extra_headers, std::span<const std::vector<double>> extra_columns) {
  if (extra_headers.size() != extra_columns.size()) throw ContractError("extra column header/data count mismatch");
  for (const auto& col : extra_columns) {
    if (col.size() != lm.size()) throw ContractError("extra landmark column length mismatch");
  }
  std::ostringstream os;
  os.precision(17);
  os << "# x_mm,y_mm,z_mm";
  for (const auto& h : extra_headers) os << ',' << h;
  os << '\n';
  for (std::size_t i = 0; i < lm.size(); ++i) {
    os << lm.points[i].x() << ',' << lm.points[i].y() << ',' << lm.points[i].z();
    for (const auto& col : extra_columns) os << ',' << col[i];
    os << '\n';
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << os.str();
}

}  // namespace ccreg
