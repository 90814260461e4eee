#include "spikescan/container.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace spikescan {

namespace {

constexpr std::string_view kMagic = "SPKN1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string text(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("SPKN1: truncated record");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const NamedTensors& tensors) {
  std::string out(kMagic);
  for (const auto& [name, t] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t e : t.shape().extents()) put_u64(out, e);
    for (double v : t.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

NamedTensors decode_tensors(const std::string& bytes) {
  if (bytes.compare(0, kMagic.size(), kMagic) != 0) throw FormatError("SPKN1: bad magic");
  Reader r(bytes);
  r.text(kMagic.size());
  NamedTensors out;
  while (!r.done()) {
    std::string name = r.text(r.uint(4));
    const std::uint64_t rank = r.uint(4);
    if (rank > 3) throw FormatError("SPKN1: rank " + std::to_string(rank) + " > 3 in '" + name + "'");
    std::vector<std::size_t> extents(rank);
    for (auto& e : extents) e = r.uint(8);
    const Shape shape(extents);
    if (shape.numel() > r.remaining() / 8) throw FormatError("SPKN1: truncated payload for '" + name + "'");
    std::vector<double> data(shape.numel());
    for (double& v : data) v = std::bit_cast<double>(r.uint(8));
    out.emplace_back(std::move(name), Tensor(shape, std::move(data)));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + tmp.string());
    f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!f) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void save_tensors(const std::filesystem::path& path, const NamedTensors& tensors) {
  write_file_atomic(path, encode_tensors(tensors));
}

NamedTensors load_tensors(const std::filesystem::path& path) { return decode_tensors(read_file(path)); }

const Tensor& find_tensor(const NamedTensors& tensors, const std::string& name) {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw FormatError("SPKN1: no tensor named '" + name + "'");
}

}  // namespace spikescan
