// Copyright 2026 The ccreg Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ccreg {

/// 64-bit FNV-1a, used for config and payload provenance (not for security).
class Fnv1a {
 public:
  void update(const void* data, std::size_t n) noexcept;
  void update(std::string_view s) noexcept { update(s.data(), s.size()); }
  std::uint64_t value() const noexcept { return h_; }
  std::string hex() const;

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ull;
};

std::string fnv1a_hex(std::string_view s);
std::string hash_file(const std::filesystem::path& p);

}  // namespace ccreg
