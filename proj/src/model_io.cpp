#include "gtsd/model_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace gtsd {

namespace {
constexpr char kMagic[4] = {'G', 'T', 'S', 'D'};
constexpr uint16_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <class T>
  void scalar(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    bytes(&v, sizeof(v));  // native little-endian
  }
  void str(const std::string& s) {
    scalar(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<uint8_t>& data() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<uint8_t> buf) : buf_(std::move(buf)) {}

  void bytes(void* p, size_t n) {
    require(at_ + n <= buf_.size(), Errc::bad_format, "model file truncated");
    std::memcpy(p, buf_.data() + at_, n);
    at_ += n;
  }
  template <class T>
  T scalar() {
    T v;
    bytes(&v, sizeof(v));
    return v;
  }
  std::string str() {
    const uint32_t n = scalar<uint32_t>();
    require(at_ + n <= buf_.size(), Errc::bad_format, "model file truncated");
    std::string s(reinterpret_cast<const char*>(buf_.data() + at_), n);
    at_ += n;
    return s;
  }
  size_t at() const { return at_; }
  const std::vector<uint8_t>& data() const { return buf_; }

 private:
  std::vector<uint8_t> buf_;
  size_t at_ = 0;
};
}  // namespace

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

void save_model(const DiffusionModel& model, const std::string& path) {
  Writer w;
  w.bytes(kMagic, 4);
  w.scalar(kVersion);
  w.scalar(static_cast<uint32_t>(model.vocab.size()));
  w.scalar(static_cast<uint32_t>(model.d()));
  w.scalar(static_cast<uint32_t>(model.L));
  w.scalar(static_cast<uint32_t>(model.sched.steps()));
  w.scalar(static_cast<uint16_t>(model.sched.kind()));
  const DenoiserConfig& net = model.denoiser.config();
  w.scalar(static_cast<uint32_t>(net.hidden));
  w.scalar(static_cast<uint32_t>(net.trunk_layers));
  w.scalar(static_cast<uint32_t>(net.time_dim));
  w.scalar(static_cast<uint32_t>(net.pos_dim));
  for (const auto& tok : model.vocab.tokens()) w.str(tok);
  for (Eigen::Index r = 0; r < model.embedding.rows(); ++r)
    for (Eigen::Index c = 0; c < model.embedding.cols(); ++c)
      w.scalar(model.embedding(r, c));
  w.scalar(static_cast<uint64_t>(model.denoiser.param_count()));
  for (Eigen::Index i = 0; i < model.denoiser.theta().size(); ++i)
    w.scalar(model.denoiser.theta()[i]);
  const uint64_t checksum = fnv1a64(w.data());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Errc::io_error, "cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(w.data().data()),
            static_cast<std::streamsize>(w.data().size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  require(out.good(), Errc::io_error, "write failed: " + path);
}

DiffusionModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io_error, "cannot open model file: " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(buf.size() >= 4 + sizeof(uint16_t) + sizeof(uint64_t), Errc::bad_format,
          "model file too short");

  const size_t body = buf.size() - sizeof(uint64_t);
  uint64_t stored = 0;
  std::memcpy(&stored, buf.data() + body, sizeof(stored));
  const uint64_t computed = fnv1a64(std::span<const uint8_t>(buf.data(), body));
  require(stored == computed, Errc::bad_format, "model file checksum mismatch");
  buf.resize(body);

  Reader r(std::move(buf));
  char magic[4];
  r.bytes(magic, 4);
  require(std::memcmp(magic, kMagic, 4) == 0, Errc::bad_format, "not a model file");
  const uint16_t version = r.scalar<uint16_t>();
  require(version == kVersion, Errc::bad_format,
          "unsupported model format version " + std::to_string(version));

  const uint32_t v_count = r.scalar<uint32_t>();
  const uint32_t d = r.scalar<uint32_t>();
  const uint32_t cap = r.scalar<uint32_t>();
  const uint32_t steps = r.scalar<uint32_t>();
  const ScheduleKind kind = schedule_kind_from_u16(r.scalar<uint16_t>());
  DenoiserConfig net;
  net.d = static_cast<int>(d);
  net.hidden = static_cast<int>(r.scalar<uint32_t>());
  net.trunk_layers = static_cast<int>(r.scalar<uint32_t>());
  net.time_dim = static_cast<int>(r.scalar<uint32_t>());
  net.pos_dim = static_cast<int>(r.scalar<uint32_t>());

  std::vector<std::string> tokens;
  tokens.reserve(v_count);
  for (uint32_t i = 0; i < v_count; ++i) tokens.push_back(r.str());

  DiffusionModel model;
  model.vocab = Vocab(std::move(tokens));
  model.L = static_cast<int>(cap);
  model.sched = build_schedule(static_cast<int>(steps), kind);
  model.embedding.resize(v_count, d);
  for (uint32_t row = 0; row < v_count; ++row)
    for (uint32_t col = 0; col < d; ++col) model.embedding(row, col) = r.scalar<double>();

  model.denoiser = Denoiser(net);
  const uint64_t params = r.scalar<uint64_t>();
  require(params == model.denoiser.param_count(), Errc::bad_format,
          "parameter count does not match the stored network shape");
  for (uint64_t i = 0; i < params; ++i)
    model.denoiser.theta()[static_cast<Eigen::Index>(i)] = r.scalar<double>();
  require(r.at() == r.data().size(), Errc::bad_format, "trailing bytes in model file");
  return model;
}

}  // namespace gtsd
