#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "rgbt/error.hpp"
#include "rgbt/mfnet.hpp"

namespace rgbt::fusion {

namespace {

namespace fs = std::filesystem;

constexpr char kMagic[4] = {'T', 'R', 'P', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff), static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated training pair '" + path + "'");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 | static_cast<std::uint32_t>(b[2]) << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

template <class T>
void put_values(std::ofstream& out, const std::vector<T>& v) {
  for (T x : v) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
}

template <class T>
void get_values(std::ifstream& in, std::vector<T>& v, const std::string& path) {
  for (auto& x : v) x = static_cast<T>(std::bit_cast<float>(get_u32(in, path)));
}

}  // namespace

void save_pair(const TrainPair& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write training pair '" + path + "'");
  out.write(kMagic, 4);
  for (int v : {p.p_rgb.width, p.p_rgb.height, p.p_rgb.channels, p.p_t.width, p.p_t.height, p.p_t.channels, p.y.width,
                p.y.height}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_values(out, p.p_rgb.data);
  put_values(out, p.p_t.data);
  put_values(out, p.y.data);
  put_values(out, p.r_rgb.data);
  put_values(out, p.r_t.data);
  if (!out) throw DataError("failed writing training pair '" + path + "'");
}

TrainPair load_pair(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open training pair '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw DataError("'" + path + "' is not a training pair");
  int d[8];
  for (int& v : d) {
    v = static_cast<int>(get_u32(in, path));
    if (v <= 0 || v > 1 << 16) throw DataError("implausible dimension in '" + path + "'");
  }
  TrainPair p;
  p.p_rgb = Image(d[0], d[1], d[2]);
  p.p_t = Image(d[3], d[4], d[5]);
  p.y = Map(d[6], d[7]);
  p.r_rgb = Map(d[6], d[7]);
  p.r_t = Map(d[6], d[7]);
  get_values(in, p.p_rgb.data, path);
  get_values(in, p.p_t.data, path);
  get_values(in, p.y.data, path);
  get_values(in, p.r_rgb.data, path);
  get_values(in, p.r_t.data, path);
  if (in.peek() != std::ifstream::traits_type::eof()) throw DataError("trailing bytes in '" + path + "'");
  return p;
}

void save_pairs(const std::vector<TrainPair>& pairs, const std::string& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "pair_%05zu.bin", i);
    save_pair(pairs[i], (fs::path(dir) / name).string());
  }
}

std::vector<TrainPair> load_pairs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("training-pair directory not found: '" + dir + "'");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrainPair> pairs;
  pairs.reserve(files.size());
  for (const auto& f : files) pairs.push_back(load_pair(f));
  return pairs;
}

}  // namespace rgbt::fusion
