#include <cstring>

#include "binary_io.hpp"
#include "motseg/optical_flow.hpp"

namespace motseg {

namespace {
constexpr char kMagic[4] = {'P', 'I', 'E', 'H'};
}

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  std::vector<std::uint8_t> bytes(kMagic, kMagic + 4);
  bytes.reserve(12 + 4 * flow.data().size());
  detail::put(bytes, static_cast<std::int32_t>(flow.width()));
  detail::put(bytes, static_cast<std::int32_t>(flow.height()));
  for (const float x : flow.data()) detail::put(bytes, x);
  return bytes;
}

FlowField decode_flo(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  const std::string what = ".flo " + source;
  if (bytes.size() < 4) throw DataError(what + ": truncated at offset " + std::to_string(bytes.size()) + " (no magic)");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError(what + ": bad magic at offset 0 (expected PIEH)");
  }
  detail::Cursor cur(bytes, what);
  cur.take<std::uint32_t>();
  const auto w = cur.take<std::int32_t>();
  const auto h = cur.take<std::int32_t>();
  if (w <= 0 || h <= 0 || w > (1 << 20) || h > (1 << 20)) {
    throw DataError(what + ": bad dimensions " + std::to_string(w) + "x" + std::to_string(h) + " at offset 4");
  }
  const std::size_t need = 8 * static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (cur.remaining() < need) {
    throw DataError(what + ": truncated payload at offset " + std::to_string(bytes.size()) + ", expected " +
                    std::to_string(cur.offset() + need) + " bytes");
  }
  FlowField flow(w, h);
  std::memcpy(flow.data().data(), bytes.data() + cur.offset(), need);
  return flow;
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(detail::read_file(path), path.string()); }

void write_flo(const std::filesystem::path& path, const FlowField& flow) { detail::write_file(path, encode_flo(flow)); }

}  // namespace motseg
