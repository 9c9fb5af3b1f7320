#include "deepbarrier/nn/checkpoint.hpp"

#include "deepbarrier/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace deepbarrier::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'B', 'A', 'R', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  template <class T>
  void pod(const T& value) {
    const auto* p = reinterpret_cast<const char*>(&value);
    out_.append(p, sizeof(T));
  }
  void doubles(const double* data, std::size_t n) { out_.append(reinterpret_cast<const char*>(data), n * sizeof(double)); }
  void text(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.append(s);
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  template <class T>
  T pod() {
    T value;
    need(sizeof(T));
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  void doubles(double* data, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(data, in_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::string text() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ValidationError("checkpoint is truncated");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

void write_spec(Writer& w, const MlpSpec& s) {
  w.pod<std::int32_t>(s.input_dim);
  w.pod<std::int32_t>(s.hidden_layers);
  w.pod<std::int32_t>(s.units);
  w.pod<std::int32_t>(s.output_dim);
  w.pod<std::uint8_t>(static_cast<std::uint8_t>(s.activation));
  w.pod(s.input_shift);
  w.pod(s.input_scale);
  w.pod(s.output_scale);
}

MlpSpec read_spec(Reader& r) {
  MlpSpec s;
  s.input_dim = r.pod<std::int32_t>();
  s.hidden_layers = r.pod<std::int32_t>();
  s.units = r.pod<std::int32_t>();
  s.output_dim = r.pod<std::int32_t>();
  const auto act = r.pod<std::uint8_t>();
  if (act > static_cast<std::uint8_t>(Activation::Relu)) throw ValidationError("checkpoint has an unknown activation");
  s.activation = static_cast<Activation>(act);
  s.input_shift = r.pod<double>();
  s.input_scale = r.pod<double>();
  s.output_scale = r.pod<double>();
  s.validate();
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const ModelParams& p = ckpt.params;
  if (p.pi_nets.empty()) throw ValidationError("checkpoint needs at least one pi network");
  Writer w;
  for (char c : kMagic) w.pod(c);
  w.pod<std::uint32_t>(kCheckpointVersion);
  write_spec(w, p.y0_net.spec);
  write_spec(w, p.pi_nets.front().spec);
  w.pod<std::int32_t>(p.steps());
  const Eigen::VectorXd flat = flatten(p);
  w.pod<std::uint64_t>(static_cast<std::uint64_t>(flat.size()));
  w.doubles(flat.data(), static_cast<std::size_t>(flat.size()));
  w.pod<std::int64_t>(p.adam.step);
  w.doubles(p.adam.m.data(), static_cast<std::size_t>(p.adam.m.size()));
  w.doubles(p.adam.v.data(), static_cast<std::size_t>(p.adam.v.size()));
  w.pod(ckpt.master_seed);
  w.pod(ckpt.next_batch);
  w.text(ckpt.config_text);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    if (r.pod<char>() != c) throw ValidationError("not a checkpoint file (bad magic)");
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  const MlpSpec y0_spec = read_spec(r);
  const MlpSpec pi_spec = read_spec(r);
  const auto steps = r.pod<std::int32_t>();
  Checkpoint ckpt;
  ckpt.params = init_model(y0_spec, pi_spec, steps, 0);
  const auto count = r.pod<std::uint64_t>();
  if (count != ckpt.params.parameter_count()) throw ValidationError("checkpoint parameter count mismatch");
  Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
  r.doubles(flat.data(), count);
  unflatten(flat, ckpt.params);
  ckpt.params.adam.step = r.pod<std::int64_t>();
  r.doubles(ckpt.params.adam.m.data(), count);
  r.doubles(ckpt.params.adam.v.data(), count);
  ckpt.master_seed = r.pod<std::uint64_t>();
  ckpt.next_batch = r.pod<std::int64_t>();
  ckpt.config_text = r.text();
  if (!r.done()) throw ValidationError("checkpoint has trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace deepbarrier::nn
