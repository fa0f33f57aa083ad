#include "ugdf/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace ugdf::io {

namespace {

constexpr int kMaxAxisExtent = 1 << 16;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& is, int64_t& offset) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) throw FormatError("truncated header field", offset);
  offset += 4;
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
  uint32_t u;
  std::memcpy(&u, &v, 4);
  write_u32(os, u);
}

float read_f32(std::istream& is, int64_t& offset) {
  const uint32_t u = read_u32(is, offset);
  float v;
  std::memcpy(&v, &u, 4);
  return v;
}

void expect_magic(std::istream& is, const char magic[6], int64_t& offset) {
  char got[6];
  is.read(got, 6);
  if (is.gcount() != 6) throw FormatError("file too short for magic", offset + is.gcount());
  for (int i = 0; i < 6; ++i)
    if (got[i] != magic[i]) throw FormatError("bad magic", offset + i);
  offset += 6;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

void check_extent(uint32_t e, int64_t offset) {
  if (e == 0 || e > kMaxAxisExtent)
    throw FormatError("axis extent " + std::to_string(e) + " out of range [1, 65536]",
                      offset - 4);
}

}  // namespace

void write_spkv(const std::string& path, const spike::SpikeVoxel& voxel) {
  auto os = open_out(path);
  os.write("SPKV1\0", 6);
  write_u32(os, static_cast<uint32_t>(voxel.t));
  write_u32(os, static_cast<uint32_t>(voxel.h));
  write_u32(os, static_cast<uint32_t>(voxel.w));
  os.write(reinterpret_cast<const char*>(voxel.bits.data()),
           static_cast<std::streamsize>(voxel.bits.size()));
  if (!os) throw std::runtime_error("write failed: " + path);
}

spike::SpikeVoxel read_spkv(const std::string& path) {
  auto is = open_in(path);
  int64_t offset = 0;
  expect_magic(is, "SPKV1\0", offset);
  spike::SpikeVoxel out;
  const uint32_t t = read_u32(is, offset);
  check_extent(t, offset);
  const uint32_t h = read_u32(is, offset);
  check_extent(h, offset);
  const uint32_t w = read_u32(is, offset);
  check_extent(w, offset);
  out.t = static_cast<int>(t);
  out.h = static_cast<int>(h);
  out.w = static_cast<int>(w);
  const int64_t expected = spike::SpikeVoxel::packed_bytes(out.t, out.h, out.w);
  out.bits.resize(static_cast<size_t>(expected));
  is.read(reinterpret_cast<char*>(out.bits.data()), expected);
  const int64_t got = is.gcount();
  if (got != expected)
    throw FormatError("truncated payload: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(got),
                      offset + got);
  return out;
}

void write_dpth(const std::string& path, const scene::DepthMap& depth) {
  if (depth.rank() != 2) throw std::invalid_argument("write_dpth: rank != 2");
  auto os = open_out(path);
  os.write("DPTH1\0", 6);
  write_u32(os, static_cast<uint32_t>(depth.shape[0]));
  write_u32(os, static_cast<uint32_t>(depth.shape[1]));
  for (const float v : depth.v) write_f32(os, v);
  if (!os) throw std::runtime_error("write failed: " + path);
}

DpthFile read_dpth(const std::string& path) {
  auto is = open_in(path);
  int64_t offset = 0;
  expect_magic(is, "DPTH1\0", offset);
  const uint32_t h = read_u32(is, offset);
  check_extent(h, offset);
  const uint32_t w = read_u32(is, offset);
  check_extent(w, offset);
  DpthFile out;
  out.depth = scene::DepthMap({static_cast<int>(h), static_cast<int>(w)});
  const int64_t expected = static_cast<int64_t>(h) * w * 4;
  std::vector<char> buf(static_cast<size_t>(expected));
  is.read(buf.data(), expected);
  const int64_t got = is.gcount();
  if (got != expected)
    throw FormatError("truncated payload: expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(got),
                      offset + got);
  for (int64_t i = 0; i < out.depth.size(); ++i) {
    uint32_t u = 0;
    for (int b = 0; b < 4; ++b)
      u |= static_cast<uint32_t>(static_cast<unsigned char>(buf[i * 4 + b])) << (8 * b);
    float v;
    std::memcpy(&v, &u, 4);
    out.depth[i] = v;
    if (std::isnan(v)) ++out.invalid_count;
  }
  return out;
}

void write_checkpoint(const std::string& path,
                      const std::vector<std::pair<std::string, Tensor<float>>>& arrays) {
  auto os = open_out(path);
  os.write("UGDF1\0", 6);
  write_u32(os, static_cast<uint32_t>(arrays.size()));
  for (const auto& [name, tensor] : arrays) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(tensor.rank()));
    for (const int e : tensor.shape) write_u32(os, static_cast<uint32_t>(e));
    for (const float v : tensor.v) write_f32(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, Tensor<float>>> read_checkpoint(const std::string& path) {
  auto is = open_in(path);
  int64_t offset = 0;
  expect_magic(is, "UGDF1\0", offset);
  const uint32_t count = read_u32(is, offset);
  std::vector<std::pair<std::string, Tensor<float>>> out;
  out.reserve(count);
  for (uint32_t k = 0; k < count; ++k) {
    const uint32_t name_len = read_u32(is, offset);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (is.gcount() != static_cast<int64_t>(name_len))
      throw FormatError("truncated array name", offset + is.gcount());
    offset += name_len;
    const uint32_t rank = read_u32(is, offset);
    if (rank > 8) throw FormatError("array rank " + std::to_string(rank) + " > 8", offset - 4);
    std::vector<int> shape(rank);
    for (auto& e : shape) {
      const uint32_t ext = read_u32(is, offset);
      check_extent(ext, offset);
      e = static_cast<int>(ext);
    }
    Tensor<float> t(shape);
    for (int64_t i = 0; i < t.size(); ++i) t[i] = read_f32(is, offset);
    out.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const auto& r : records) {
    nlohmann::json j{{"left_spkv", r.left_spkv},
                     {"right_spkv", r.right_spkv},
                     {"right_depth", r.right_depth},
                     {"rig",
                      {{"focal_px", r.rig.focal_px},
                       {"baseline_m", r.rig.baseline_m},
                       {"d_max", r.rig.d_max}}},
                     {"split", r.split},
                     {"seed", r.seed}};
    os << j.dump() << "\n";
  }
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::vector<ManifestRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ManifestRecord r;
    r.left_spkv = j.at("left_spkv").get<std::string>();
    r.right_spkv = j.at("right_spkv").get<std::string>();
    r.right_depth = j.at("right_depth").get<std::string>();
    r.rig.focal_px = j.at("rig").at("focal_px").get<double>();
    r.rig.baseline_m = j.at("rig").at("baseline_m").get<double>();
    r.rig.d_max = j.at("rig").at("d_max").get<double>();
    r.split = j.at("split").get<std::string>();
    if (r.split != "train" && r.split != "val" && r.split != "test")
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               ": unknown split tag '" + r.split + "'");
    r.seed = j.at("seed").get<uint32_t>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ugdf::io
