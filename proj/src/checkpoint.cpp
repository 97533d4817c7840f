#include "tqa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tqa/errors.hpp"

namespace tqa {
namespace {

constexpr char kMagic[8] = {'T', 'Q', 'A', 'C', 'K', 'P', 'T', '\0'};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}

  template <typename T>
  void integer(T value) {
    unsigned char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    out_.write(reinterpret_cast<const char*>(bytes), sizeof(T));
  }
  void real(double value) { integer(std::bit_cast<std::uint64_t>(value)); }
  void string(const std::string& s) {
    integer(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void reals(std::span<const double> values) {
    for (double v : values) real(v);
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}

  template <typename T>
  T integer() {
    unsigned char bytes[sizeof(T)];
    read(reinterpret_cast<char*>(bytes), sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
    return value;
  }
  double real() { return std::bit_cast<double>(integer<std::uint64_t>()); }
  std::string string() {
    const auto n = integer<std::uint32_t>();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  std::vector<double> reals(std::size_t n) {
    std::vector<double> values(n);
    for (auto& v : values) v = real();
    return values;
  }
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw CheckpointError(path_ + ": truncated checkpoint");
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof(kMagic));
  w.integer(kCheckpointVersion);
  w.string(checkpoint.config_text);
  w.integer(static_cast<std::uint32_t>(checkpoint.vocabulary.size()));
  for (const auto& token : checkpoint.vocabulary) w.string(token);
  w.integer(static_cast<std::uint32_t>(checkpoint.params.size()));
  for (const auto& [name, tensor] : checkpoint.params) {
    w.string(name);
    w.integer(static_cast<std::uint32_t>(tensor.rank()));
    for (auto d : tensor.shape()) w.integer(static_cast<std::uint64_t>(d));
    w.reals(tensor.data());
  }
  w.integer(static_cast<std::uint8_t>(checkpoint.optimizer.has_value()));
  if (checkpoint.optimizer) {
    const auto& s = *checkpoint.optimizer;
    w.integer(static_cast<std::uint64_t>(s.step));
    w.real(s.lr);
    w.real(s.beta1);
    w.real(s.beta2);
    w.real(s.eps);
    w.integer(static_cast<std::uint32_t>(s.first_moment.size()));
    for (std::size_t k = 0; k < s.first_moment.size(); ++k) {
      w.integer(static_cast<std::uint64_t>(s.first_moment[k].size()));
      w.reals(s.first_moment[k]);
      w.reals(s.second_moment[k]);
    }
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[sizeof(kMagic)];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw CheckpointError(path.string() + ": not a tqa checkpoint");
  const auto version = r.integer<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));

  Checkpoint ck;
  ck.config_text = r.string();
  const auto vocab_count = r.integer<std::uint32_t>();
  ck.vocabulary.reserve(vocab_count);
  for (std::uint32_t i = 0; i < vocab_count; ++i) ck.vocabulary.push_back(r.string());
  const auto param_count = r.integer<std::uint32_t>();
  for (std::uint32_t i = 0; i < param_count; ++i) {
    auto name = r.string();
    const auto rank = r.integer<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.integer<std::uint64_t>());
    auto values = r.reals(shape_size(shape));
    ck.params.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(values)));
  }
  if (r.integer<std::uint8_t>() != 0) {
    AdamState s;
    s.step = r.integer<std::uint64_t>();
    s.lr = r.real();
    s.beta1 = r.real();
    s.beta2 = r.real();
    s.eps = r.real();
    const auto count = r.integer<std::uint32_t>();
    for (std::uint32_t k = 0; k < count; ++k) {
      const auto n = static_cast<std::size_t>(r.integer<std::uint64_t>());
      s.first_moment.push_back(r.reals(n));
      s.second_moment.push_back(r.reals(n));
    }
    ck.optimizer = std::move(s);
  }
  return ck;
}

}  // namespace tqa
