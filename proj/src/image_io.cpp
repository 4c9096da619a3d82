#include "motseg/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <memory>

#include "binary_io.hpp"

namespace motseg {

Frame read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return Frame(static_cast<int>(image.width), static_cast<int>(image.height), std::move(pixels));
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(frame.width());
  image.height = static_cast<png_uint_32>(frame.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, frame.bytes().data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const std::string& what) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
  if (tok.empty()) throw DataError(what + ": truncated header at offset " + std::to_string(pos));
  return tok;
}

int header_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const std::string& what) {
  const std::size_t at = pos;
  const std::string tok = header_token(bytes, pos, what);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError(what + ": bad header field '" + tok + "' at offset " + std::to_string(at));
  }
}

}  // namespace

Raster<std::uint8_t> read_pgm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string what = "PGM " + path.string();
  std::size_t pos = 0;
  if (header_token(bytes, pos, what) != "P5") throw DataError(what + ": not a binary PGM (P5) file");
  const int w = header_int(bytes, pos, what);
  const int h = header_int(bytes, pos, what);
  const int maxval = header_int(bytes, pos, what);
  if (w <= 0 || h <= 0) throw DataError(what + ": nonpositive dimensions");
  if (maxval <= 0 || maxval > 255) throw DataError(what + ": only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (pos + need > bytes.size()) {
    throw DataError(what + ": truncated payload at offset " + std::to_string(bytes.size()) + ", expected " +
                    std::to_string(pos + need) + " bytes");
  }
  Raster<std::uint8_t> out(w, h);
  std::memcpy(out.values().data(), bytes.data() + pos, need);
  return out;
}

void write_pgm(const std::filesystem::path& path, const Raster<std::uint8_t>& gray) {
  const std::string header =
      "P5\n" + std::to_string(gray.width()) + " " + std::to_string(gray.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), gray.values().begin(), gray.values().end());
  detail::write_file(path, bytes);
}

BinaryMask read_mask_pgm(const std::filesystem::path& path) {
  const auto gray = read_pgm(path);
  BinaryMask mask(gray.width(), gray.height());
  for (std::size_t i = 0; i < gray.size(); ++i) mask[i] = gray[i] != 0 ? 1 : 0;
  return mask;
}

void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  Raster<std::uint8_t> gray(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  write_pgm(path, gray);
}

Raster<float> read_float_raster(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::Cursor cur(bytes, "float raster " + path.string());
  const auto w = cur.take<std::uint32_t>();
  const auto h = cur.take<std::uint32_t>();
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20)) {
    throw DataError("float raster " + path.string() + ": bad dimensions");
  }
  Raster<float> out(static_cast<int>(w), static_cast<int>(h));
  for (auto& v : out.values()) v = cur.take<float>();
  return out;
}

void write_float_raster(const std::filesystem::path& path, const Raster<float>& raster) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 + 4 * raster.size());
  detail::put(bytes, static_cast<std::uint32_t>(raster.width()));
  detail::put(bytes, static_cast<std::uint32_t>(raster.height()));
  for (const float v : raster.values()) detail::put(bytes, v);
  detail::write_file(path, bytes);
}

}  // namespace motseg
