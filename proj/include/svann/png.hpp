// Minimal 8-bit grayscale PNG writer for mask rendering. Emits a valid
// zlib stream using stored (uncompressed) deflate blocks, so there is no
// compression dependency; output is deterministic byte for byte.

#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>

#include "svann/raster.hpp"
#include "svann/raster_io.hpp"

namespace svann {

namespace detail {

inline std::uint32_t crc32(const unsigned char* data, std::size_t len,
                           std::uint32_t crc = 0xFFFFFFFFu) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc;
}

inline void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>(v & 0xFF));
}

inline void put_chunk(std::string& out, const char type[4], const std::string& payload) {
  put_u32_be(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t start = out.size();
  out.append(type, 4);
  out += payload;
  const std::uint32_t crc = crc32(reinterpret_cast<const unsigned char*>(out.data() + start),
                                  out.size() - start) ^
                            0xFFFFFFFFu;
  put_u32_be(out, crc);
}

inline std::uint32_t adler32(const std::string& data) {
  std::uint32_t a = 1, b = 0;
  for (unsigned char c : data) {
    a = (a + c) % 65521u;
    b = (b + a) % 65521u;
  }
  return (b << 16) | a;
}

/// zlib container around stored deflate blocks (max 65535 bytes each).
inline std::string zlib_stored(const std::string& raw) {
  std::string out;
  out.push_back(0x78);  // 32K window, deflate
  out.push_back(0x01);  // no preset dict, fastest
  std::size_t off = 0;
  do {
    const std::size_t n = std::min<std::size_t>(raw.size() - off, 65535);
    const bool last = off + n == raw.size();
    out.push_back(last ? 1 : 0);
    out.push_back(static_cast<char>(n & 0xFF));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(~n & 0xFF));
    out.push_back(static_cast<char>((~n >> 8) & 0xFF));
    out.append(raw, off, n);
    off += n;
  } while (off < raw.size());
  put_u32_be(out, adler32(raw));
  return out;
}

}  // namespace detail

/// Serialize an 8-bit grayscale image (row-major) as PNG bytes.
inline std::string encode_png_gray(const GridU8& pixels) {
  const auto width = static_cast<std::uint32_t>(pixels.cols());
  const auto height = static_cast<std::uint32_t>(pixels.rows());
  std::string raw;  // each scanline prefixed by filter byte 0
  raw.reserve(static_cast<std::size_t>(height) * (static_cast<std::size_t>(width) + 1));
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    raw.push_back(0);
    raw.append(reinterpret_cast<const char*>(pixels.data() + r * pixels.cols()),
               static_cast<std::size_t>(width));
  }

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  detail::put_u32_be(ihdr, width);
  detail::put_u32_be(ihdr, height);
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // color type: grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", detail::zlib_stored(raw));
  detail::put_chunk(out, "IEND", "");
  return out;
}

/// Render a mask for human review: wetland 255, non-wetland 0, nodata 128.
inline void render_mask_png(const Mask& mask, const std::filesystem::path& path) {
  GridU8 img(mask.height(), mask.width());
  for (Eigen::Index i = 0; i < mask.values.size(); ++i) {
    switch (mask.values(i)) {
      case 1: img(i) = 255; break;
      case 0: img(i) = 0; break;
      default: img(i) = 128; break;
    }
  }
  detail::write_file_atomic(path, encode_png_gray(img));
}

}  // namespace svann
