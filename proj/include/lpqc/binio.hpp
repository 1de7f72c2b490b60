// Copyright 2026 The LPQC Authors
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

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "lpqc/error.hpp"

/// Little-endian scalar I/O shared by the binary file formats.
namespace lpqc::binio {

template <typename T> void put(std::ostream &out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), sizeof(T));
}

/// Reads one scalar; throws DataError carrying the byte offset on EOF.
template <typename T> T get(std::istream &in) {
    std::array<unsigned char, sizeof(T)> bytes{};
    const auto pos = in.tellg();
    in.read(reinterpret_cast<char *>(bytes.data()), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
        throw DataError("truncated input",
                        pos < 0 ? 0 : static_cast<std::uint64_t>(pos));
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void put_magic(std::ostream &out, std::string_view magic) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream &in, std::string_view magic) {
    std::array<char, 8> buf{};
    in.read(buf.data(), static_cast<std::streamsize>(magic.size()));
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) ||
        std::string_view(buf.data(), magic.size()) != magic) {
        throw DataError("bad magic, expected " + std::string(magic), 0);
    }
}

} // namespace lpqc::binio
