#include "seq2slate/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "seq2slate/error.h"

namespace seq2slate {

namespace {

constexpr char kMagic[4] = {'S', '2', 'S', 'L'};

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  Reader(const unsigned char* data, size_t size) : data_(data), size_(size) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + static_cast<size_t>(i)];
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | data_[pos_ + static_cast<size_t>(i)];
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  void raw(char* dst, size_t len) {
    need(len);
    std::memcpy(dst, data_ + pos_, len);
    pos_ += len;
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return size_ - pos_; }

 private:
  void need(size_t k) const {
    if (pos_ + k > size_) throw DataError("checkpoint: truncated file");
  }
  const unsigned char* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const PointerNetParams& params, const std::string& path) {
  if (!params.all_finite()) throw NumericError("checkpoint: refusing to save non-finite params");
  std::vector<unsigned char> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kCheckpointVersion);
  put_u32(buf, static_cast<uint32_t>(params.m_raw));
  put_u32(buf, static_cast<uint32_t>(params.m));
  put_u32(buf, static_cast<uint32_t>(params.rho));
  params.for_each_tensor([&](const char*, const Tensor& t) {
    put_u32(buf, static_cast<uint32_t>(t.size()));
    for (int64_t i = 0; i < t.size(); ++i) put_f64(buf, t[i]);
  });
  const uint32_t crc =
      static_cast<uint32_t>(crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
  put_u32(buf, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

PointerNetParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 4 + 4 + 12 + 4) throw DataError("checkpoint: file too short: " + path);

  const uint32_t stored_crc = [&] {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | buf[buf.size() - 4 + static_cast<size_t>(i)];
    return v;
  }();
  const uint32_t actual_crc = static_cast<uint32_t>(
      crc32(0L, buf.data(), static_cast<uInt>(buf.size() - 4)));
  if (stored_crc != actual_crc) throw DataError("checkpoint: CRC mismatch: " + path);

  Reader r(buf.data(), buf.size() - 4);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw DataError("checkpoint: bad magic: " + path);
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const uint32_t m_raw = r.u32();
  const uint32_t m = r.u32();
  const uint32_t rho = r.u32();
  PointerNetParams params = PointerNetParams::make(
      static_cast<int>(m_raw), static_cast<int>(m), static_cast<int>(rho));
  params.for_each_tensor([&](const char* name, Tensor& t) {
    const uint32_t count = r.u32();
    if (static_cast<int64_t>(count) != t.size()) {
      throw DataError(std::string("checkpoint: size mismatch for tensor ") + name);
    }
    for (int64_t i = 0; i < t.size(); ++i) t[i] = r.f64();
  });
  if (r.remaining() != 0) throw DataError("checkpoint: trailing bytes: " + path);
  if (!params.all_finite()) throw NumericError("checkpoint: non-finite values in " + path);
  return params;
}

}  // namespace seq2slate
