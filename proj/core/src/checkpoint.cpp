#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rgbt/error.hpp"
#include "rgbt/nnet.hpp"

namespace rgbt::nn {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'N', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void magic() {
    need(4);
    if (std::memcmp(bytes_.data(), kMagic, 4) != 0) throw DataError("checkpoint: bad magic (expected MFN1)");
    pos_ += 4;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint: truncated file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::uint32_t>& d) {
  auto expect = [&](std::size_t n) {
    if (d.size() != n) throw DataError("checkpoint: wrong dim count for " + std::string(to_string(kind)));
  };
  auto i = [&](std::size_t k) { return static_cast<int>(d[k]); };
  switch (kind) {
    case LayerKind::conv2d:
      expect(6);
      return std::make_unique<Conv2d>(i(0), i(1), i(2), i(3), i(4), i(5));
    case LayerKind::deconv2d:
      expect(6);
      return std::make_unique<Deconv2d>(i(0), i(1), i(2), i(3), i(4), i(5));
    case LayerKind::relu:
      expect(0);
      return std::make_unique<Relu>();
    case LayerKind::sigmoid:
      expect(0);
      return std::make_unique<Sigmoid>();
    case LayerKind::lrn:
      expect(1);
      return std::make_unique<Lrn>(i(0));
    case LayerKind::bilinear_resize:
      expect(2);
      return std::make_unique<BilinearResize>(i(0), i(1));
  }
  throw DataError("checkpoint: unknown layer kind " + std::to_string(static_cast<std::uint32_t>(kind)));
}

}  // namespace

// LRN constants are stored as its three "parameters" so the format stays
// uniform; they are not trainable.
std::vector<std::uint8_t> serialize(std::span<const Network* const> nets) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, static_cast<std::uint32_t>(nets.size()));
  for (const Network* net : nets) {
    put_u32(out, static_cast<std::uint32_t>(net->size()));
    for (std::size_t li = 0; li < net->size(); ++li) {
      const Layer& l = net->layer(li);
      put_u32(out, static_cast<std::uint32_t>(l.kind()));
      const auto dims = l.dims();
      put_u32(out, static_cast<std::uint32_t>(dims.size()));
      for (auto v : dims) put_u32(out, v);
      if (const auto* lrn = dynamic_cast<const Lrn*>(&l)) {
        put_u32(out, 3);
        put_f32(out, static_cast<float>(lrn->alpha));
        put_f32(out, static_cast<float>(lrn->beta));
        put_f32(out, static_cast<float>(lrn->k));
        continue;
      }
      const auto p = l.params();
      put_u32(out, static_cast<std::uint32_t>(p.size()));
      for (double v : p) put_f32(out, static_cast<float>(v));
    }
  }
  return out;
}

std::vector<Network> deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic();
  const std::uint32_t count = r.u32();
  std::vector<Network> nets(count);
  for (auto& net : nets) {
    const std::uint32_t layers = r.u32();
    for (std::uint32_t li = 0; li < layers; ++li) {
      const auto kind = static_cast<LayerKind>(r.u32());
      std::vector<std::uint32_t> dims(r.u32());
      for (auto& v : dims) v = r.u32();
      auto layer = make_layer(kind, dims);
      const std::uint32_t np = r.u32();
      if (auto* lrn = dynamic_cast<Lrn*>(layer.get())) {
        if (np != 3) throw DataError("checkpoint: lrn expects 3 constants");
        lrn->alpha = r.f32();
        lrn->beta = r.f32();
        lrn->k = r.f32();
      } else {
        if (np != layer->params().size()) {
          throw DataError("checkpoint: layer " + std::to_string(li) + " parameter count mismatch");
        }
        for (auto& v : layer->params()) v = static_cast<double>(r.f32());
      }
      net.add(std::move(layer));
    }
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return nets;
}

void save_checkpoint(const std::string& path, std::span<const Network* const> nets) {
  const auto bytes = serialize(nets);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

std::vector<Network> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace rgbt::nn
